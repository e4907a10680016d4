//! Token similarity, atomic-token scores and edit distance.

/// Longest common run of characters divided by the longer length.
pub fn sim(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = 0;
    for &ca in &a {
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = if ca == cb { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best as f64 / longest as f64
}

/// Orders two token lists so the first is the shorter one.
fn shorter_first<'a, S: AsRef<str>>(s1: &'a [S], s2: &'a [S]) -> (&'a [S], &'a [S]) {
    if s1.len() <= s2.len() {
        (s1, s2)
    } else {
        (s2, s1)
    }
}

/// Order-insensitive atomic-token score: each token of the shorter name
/// takes its best similarity against the longer name, and the sum is
/// divided by the longer name's length.
pub fn atomic_token<S: AsRef<str>>(s1: &[S], s2: &[S]) -> f64 {
    let (short, long) = shorter_first(s1, s2);
    if long.is_empty() || short.is_empty() {
        return 0.0;
    }
    let total: f64 = short
        .iter()
        .map(|s| {
            long.iter()
                .map(|t| sim(s.as_ref(), t.as_ref()))
                .fold(0.0, f64::max)
        })
        .sum();
    total / long.len() as f64
}

/// Positional weight `1 - |i - k| / n2`.
pub fn position_weight(i: usize, k: usize, n2: usize) -> f64 {
    1.0 - i.abs_diff(k) as f64 / n2 as f64
}

/// Largest destination list solved exactly; longer ones fall back to greedy.
const EXACT_ASSIGNMENT_LIMIT: usize = 16;

/// Weighted atomic token: every token of the shorter name is paired with a
/// distinct token of the longer one, each pair scoring its similarity times
/// the positional weight. The best such pairing is summed and divided by
/// the shorter length.
pub fn weighted_atomic_token<S: AsRef<str>>(s1: &[S], s2: &[S]) -> f64 {
    let (short, long) = shorter_first(s1, s2);
    let (n1, n2) = (short.len(), long.len());
    if n1 == 0 {
        return 0.0;
    }
    let score: Vec<Vec<f64>> = short
        .iter()
        .enumerate()
        .map(|(k, s)| {
            long.iter()
                .enumerate()
                .map(|(i, t)| position_weight(i, k, n2) * sim(s.as_ref(), t.as_ref()))
                .collect()
        })
        .collect();
    let best = if n2 <= EXACT_ASSIGNMENT_LIMIT {
        best_assignment(&score, n2)
    } else {
        greedy_assignment(&score, n2)
    };
    (best / n1 as f64).clamp(0.0, 1.0)
}

/// Maximum-weight matching of rows into distinct columns, by DP over the
/// set of used columns.
fn best_assignment(score: &[Vec<f64>], cols: usize) -> f64 {
    let full = 1usize << cols;
    let mut dp = vec![f64::NEG_INFINITY; full];
    dp[0] = 0.0;
    for row in score {
        let mut next = vec![f64::NEG_INFINITY; full];
        for (mask, &value) in dp.iter().enumerate() {
            if value == f64::NEG_INFINITY {
                continue;
            }
            for (c, &s) in row.iter().enumerate() {
                if mask & (1 << c) == 0 {
                    let m = mask | (1 << c);
                    next[m] = next[m].max(value + s);
                }
            }
        }
        dp = next;
    }
    dp.into_iter().fold(0.0, f64::max)
}

fn greedy_assignment(score: &[Vec<f64>], cols: usize) -> f64 {
    let mut cells: Vec<(usize, usize, f64)> = score
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &s)| (r, c, s)))
        .collect();
    cells.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut row_used = vec![false; score.len()];
    let mut col_used = vec![false; cols];
    let mut total = 0.0;
    for (r, c, s) in cells {
        if !row_used[r] && !col_used[c] {
            row_used[r] = true;
            col_used[c] = true;
            total += s;
        }
    }
    total
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
