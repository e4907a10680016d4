//! Seeded synthetic rosters with planted ground truth: an Arabic
//! destination roster, transliterated source queries, and the name pairs
//! needed to build a dictionary for them.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::record::DatasetRecord;

/// Arabic given name with its usual Latin spellings, most common first.
const GIVEN: &[(&str, &[&str])] = &[
    ("محمد", &["mohamed", "mohammed", "muhammad"]),
    ("احمد", &["ahmed", "ahmad"]),
    ("علي", &["ali", "aly"]),
    ("عادل", &["adel"]),
    ("اسامه", &["osama", "usama"]),
    ("محمود", &["mahmoud", "mahmud"]),
    ("حسن", &["hassan", "hasan"]),
    ("حسين", &["hussein", "hossein"]),
    ("خالد", &["khaled", "khalid"]),
    ("يوسف", &["youssef", "yousef"]),
    ("مصطفى", &["mostafa", "mustafa"]),
    ("سعيد", &["saeed", "said"]),
    ("طارق", &["tarek", "tariq"]),
    ("كريم", &["karim", "kareem"]),
    ("هشام", &["hesham", "hisham"]),
    ("وليد", &["walid", "waleed"]),
    ("ياسر", &["yasser", "yasir"]),
    ("سامي", &["samy", "sami"]),
    ("ماجد", &["maged", "majid"]),
    ("نبيل", &["nabil", "nabeel"]),
    ("رامي", &["ramy", "rami"]),
    ("شريف", &["sherif", "sharif"]),
    ("جمال", &["gamal", "jamal"]),
    ("فاروق", &["farouk", "farouq"]),
    ("عبد الرحمن", &["abdel rahman", "abd el rahman", "abdul rahman"]),
    ("عبد العزيز", &["abdel aziz", "abdul aziz"]),
    ("عبد الفتاح", &["abdel fattah", "abd el fattah"]),
];

/// First names that an `a` initial could reach through the romanization
/// table but whose transliteration starts with another letter.
const TRAPS: &[(&str, &[&str])] = &[
    ("ايمان", &["eman", "iman"]),
    ("عمر", &["omar", "omer"]),
    ("ابراهيم", &["ibrahim", "ebrahim"]),
];

const FAMILY: &[(&str, &[&str])] = &[
    ("سلامه", &["salama", "salamah"]),
    ("منصور", &["mansour", "mansur"]),
    ("الشافعي", &["el shafei", "elshafei"]),
    ("النجار", &["el naggar", "elnaggar"]),
    ("عثمان", &["osman", "othman"]),
    ("بدوي", &["badawi", "badawy"]),
    ("رزق", &["rizk", "rezk"]),
    ("حماد", &["hammad"]),
    ("شاهين", &["shahin", "shaheen"]),
    ("عيسى", &["eissa", "issa"]),
    ("درويش", &["darwish"]),
    ("فهمي", &["fahmy", "fahmi"]),
];

/// Family names kept apart for the initial-letter cases so no unrelated
/// roster entry can satisfy their patterns.
const RESERVED_FAMILY: &[(&str, &[&str])] = &[
    ("الدسوقي", &["el desouky"]),
    ("القناوي", &["el kenawy"]),
    ("البنا", &["el banna"]),
    ("الجندي", &["el gendy"]),
    ("الشربيني", &["el sherbiny"]),
];

const GOVERNORATES: &[&str] = &["cairo", "giza", "alexandria"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantedKind {
    /// Every token transliterated.
    Plain,
    /// The query carries a middle name the roster entry lacks.
    ExtraMiddle,
    /// Given and father names abbreviated to initials.
    Initials,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub seed: u64,
    pub destinations: usize,
    pub sources: usize,
    pub extra_middle: usize,
    pub initials: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            destinations: 200,
            sources: 50,
            extra_middle: 10,
            initials: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub destinations: Vec<DatasetRecord>,
    pub sources: Vec<DatasetRecord>,
    /// Arabic/Latin name pairs covering every token used.
    pub training_pairs: Vec<(String, String)>,
    /// Source id to the destination id it was generated from.
    pub truth: BTreeMap<String, String>,
    pub kinds: BTreeMap<String, PlantedKind>,
    /// Source id to a destination that differs only by a trap first name.
    pub traps: BTreeMap<String, String>,
}

type Entry = (&'static str, &'static [&'static str]);

struct Generator {
    rng: ChaCha8Rng,
    used: BTreeSet<Vec<&'static str>>,
    destinations: Vec<(Vec<Entry>, &'static str)>,
}

impl Generator {
    fn pick(&mut self, pool: &[Entry]) -> Entry {
        *pool.choose(&mut self.rng).expect("non-empty pool")
    }

    /// A fresh roster name, distinct from every earlier one.
    fn unique(&mut self, mut make: impl FnMut(&mut Self) -> Vec<Entry>) -> Vec<Entry> {
        loop {
            let name = make(self);
            let key: Vec<&str> = name.iter().map(|e| e.0).collect();
            let distinct: BTreeSet<&str> = key.iter().copied().collect();
            if distinct.len() == key.len() && self.used.insert(key) {
                return name;
            }
        }
    }

    fn push(&mut self, name: Vec<Entry>) -> usize {
        let gov = *GOVERNORATES.choose(&mut self.rng).expect("governorates");
        self.destinations.push((name, gov));
        self.destinations.len() - 1
    }

    fn spell(&mut self, e: Entry) -> String {
        e.1.choose(&mut self.rng).expect("spelling").to_string()
    }
}

fn arabic(name: &[Entry]) -> String {
    name.iter().map(|e| e.0).collect::<Vec<_>>().join(" ")
}

fn title(s: &str) -> String {
    s.split(' ')
        .map(|w| {
            let mut c = w.chars();
            c.next()
                .map(|f| f.to_ascii_uppercase().to_string() + c.as_str())
                .unwrap_or_default()
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Deterministic fixture for `spec`. Plain queries fill whatever the extra
/// middle and initial cases leave of `spec.sources`.
pub fn generate(spec: &FixtureSpec) -> Fixture {
    assert!(spec.extra_middle + spec.initials <= spec.sources);
    assert!(spec.initials <= RESERVED_FAMILY.len());
    assert!(spec.sources + spec.initials <= spec.destinations);
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        used: BTreeSet::new(),
        destinations: Vec::new(),
    };
    let mut queries: Vec<(String, usize, PlantedKind, Option<usize>)> = Vec::new();

    for case in 0..spec.initials {
        let starts_a: Vec<Entry> = GIVEN.iter().copied().filter(|e| e.1[0].starts_with('a')).collect();
        let family = RESERVED_FAMILY[case];
        let name = g.unique(|g| {
            vec![g.pick(&starts_a), g.pick(GIVEN), g.pick(GIVEN), family]
        });
        let trap_first = TRAPS[case % TRAPS.len()];
        let mut trap = name.clone();
        trap[0] = trap_first;
        g.used.insert(trap.iter().map(|e| e.0).collect());
        let truth = g.push(name.clone());
        let trap_idx = g.push(trap);
        g.destinations[trap_idx].1 = g.destinations[truth].1;
        let father = g.spell(name[1]);
        let family_latin = title(&g.spell(family));
        let query = if case % 2 == 0 {
            format!("A. {}. {}", father[..1].to_ascii_uppercase(), family_latin)
        } else {
            format!("{}, A. {}.", family_latin, father[..1].to_ascii_uppercase())
        };
        queries.push((query, truth, PlantedKind::Initials, Some(trap_idx)));
    }

    for _ in 0..spec.extra_middle {
        let name = g.unique(|g| vec![g.pick(GIVEN), g.pick(GIVEN), g.pick(FAMILY)]);
        let extra = loop {
            let e = g.pick(GIVEN);
            if name.iter().all(|n| n.0 != e.0) {
                break e;
            }
        };
        let truth = g.push(name.clone());
        let mut spelled = [g.spell(name[0]), g.spell(extra), g.spell(name[1]), g.spell(name[2])];
        if g.rng.gen_bool(0.5) {
            spelled.swap(1, 2);
        }
        queries.push((title(&spelled.join(" ")), truth, PlantedKind::ExtraMiddle, None));
    }

    let plain = spec.sources - spec.extra_middle - spec.initials;
    for _ in 0..plain {
        let name = g.unique(|g| vec![g.pick(GIVEN), g.pick(GIVEN), g.pick(GIVEN), g.pick(FAMILY)]);
        let truth = g.push(name.clone());
        let spelled: Vec<String> = name.iter().map(|&e| g.spell(e)).collect();
        queries.push((title(&spelled.join(" ")), truth, PlantedKind::Plain, None));
    }

    while g.destinations.len() < spec.destinations {
        let name = g.unique(|g| {
            let n = if g.rng.gen_bool(0.3) { 3 } else { 4 };
            let mut v: Vec<Entry> = (0..n - 1).map(|_| g.pick(GIVEN)).collect();
            v.push(g.pick(FAMILY));
            v
        });
        g.push(name);
    }

    // Roster order is shuffled so ids carry no hint of the planted cases.
    let mut order: Vec<usize> = (0..g.destinations.len()).collect();
    order.shuffle(&mut g.rng);
    let mut dest_id = vec![String::new(); order.len()];
    let mut destinations = Vec::with_capacity(order.len());
    for (pos, &idx) in order.iter().enumerate() {
        let id = format!("D{:04}", pos + 1);
        dest_id[idx] = id.clone();
        let (name, gov) = &g.destinations[idx];
        destinations.push(DatasetRecord::new(id, arabic(name)).with_field("governorate", gov));
    }
    destinations.sort_by(|a, b| a.id.cmp(&b.id));

    queries.shuffle(&mut g.rng);
    let mut fixture = Fixture {
        destinations,
        sources: Vec::new(),
        training_pairs: Vec::new(),
        truth: BTreeMap::new(),
        kinds: BTreeMap::new(),
        traps: BTreeMap::new(),
    };
    for (n, (query, truth, kind, trap)) in queries.into_iter().enumerate() {
        let id = format!("S{:03}", n + 1);
        let gov = g.destinations[truth].1;
        fixture
            .sources
            .push(DatasetRecord::new(id.clone(), query).with_field("governorate", gov));
        fixture.truth.insert(id.clone(), dest_id[truth].clone());
        fixture.kinds.insert(id.clone(), kind);
        if let Some(t) = trap {
            fixture.traps.insert(id, dest_id[t].clone());
        }
    }
    for pool in [GIVEN, TRAPS, FAMILY, RESERVED_FAMILY] {
        for (ar, spellings) in pool {
            for latin in *spellings {
                fixture.training_pairs.push((ar.to_string(), latin.to_string()));
            }
        }
    }
    fixture
}

impl Fixture {
    /// Ground truth as expert labels: one verified destination per source.
    pub fn expert_labels(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.truth
            .iter()
            .map(|(s, d)| (s.clone(), BTreeSet::from([d.clone()])))
            .collect()
    }
}
