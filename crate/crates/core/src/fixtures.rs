//! Synthetic news-style corpus with typed entities, for tests, demos and
//! benchmarking.
//!
//! Each document opens with a lead sentence that the reference summary
//! paraphrases, followed by filler sentences that mention other entities of
//! the same types. [`plant_hallucinations`] swaps one summary entity for a
//! same-typed entity that the document never mentions.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::derive_seed;
use crate::contrast::find_hallucinated;
use crate::corpus::Example;
use crate::ner::{BuiltinRecognizer, EntityLabel, EntityMention, Gazetteer};
use crate::text::splice;

/// Metadata key holding the gold "summary is hallucinated" flag.
pub const GOLD_FLAG_KEY: &str = "hallucinated";

const FIRST_NAMES: &[&str] = &[
    "Maria", "Tomas", "Aisha", "Henrik", "Priya", "Daniel", "Sofia", "Kwame", "Elena", "Rafael", "Ingrid", "Oliver",
    "Yuki", "Nadia", "Samuel", "Leila", "Viktor", "Grace", "Mateo", "Hannah",
];
const SURNAMES: &[&str] = &[
    "Keller",
    "Okafor",
    "Lindqvist",
    "Moreau",
    "Tanaka",
    "Brennan",
    "Castillo",
    "Novak",
    "Haddad",
    "Fischer",
    "Osei",
    "Whitfield",
    "Romano",
    "Petrov",
    "Sandoval",
    "Achebe",
    "Larsen",
    "Kowalski",
    "Dunmore",
    "Varga",
];
const ORGS: &[&str] = &[
    "Northwind Bank",
    "Harbor Logistics",
    "Crestline Motors",
    "Blue Fjord Energy",
    "Meridian Foods",
    "Ashgrove Pharma",
    "Solent Airways",
    "Ironbridge Steel",
    "Kestrel Telecom",
    "Pinecrest Insurance",
    "Quarry Hill Mining",
    "Redwater Utilities",
    "Silverline Rail",
    "Tidewater Shipping",
    "Union Mills",
    "Vantage Media",
    "Westmoor Retail",
    "Yellowfield Farms",
    "Copperleaf Software",
    "Granite Holdings",
];
const GPES: &[&str] = &[
    "Leeds",
    "Lyon",
    "Porto",
    "Gdansk",
    "Rotterdam",
    "Bergen",
    "Seville",
    "Turin",
    "Cork",
    "Malmo",
    "Antwerp",
    "Glasgow",
    "Bilbao",
    "Graz",
    "Tampere",
    "Brno",
    "Nantes",
    "Aarhus",
    "Cardiff",
    "Leipzig",
];
const MONTHS: &[&str] = &[
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

/// Lead sentence and its summary paraphrase. Slots: `{P1}` `{P2}` persons,
/// `{O1}` `{O2}` organisations, `{G1}` `{G2}` places, `{D1}` date, `{M1}`
/// money, `{C1}` count, `{R1}` percentage. Index 1 is the summarized entity;
/// index 2 a distractor.
const LEADS: &[(&str, &str)] = &[
    (
        "{P1}, chief executive of {O1}, said on {D1} that the company would invest {M1} in a new plant in {G1}.",
        "{O1} is to invest {M1} in a new plant in {G1}, its chief executive {P1} has said.",
    ),
    (
        "{O1} has cut {C1} jobs at its factory in {G1}, the company confirmed on {D1}.",
        "{O1} has cut {C1} jobs at its factory in {G1}.",
    ),
    (
        "Unemployment in {G1} fell to {R1} in the year to {D1}, official figures show.",
        "Unemployment in {G1} has fallen to {R1}, official figures show.",
    ),
    (
        "{P1} has been appointed head of {O1}, replacing {P2}, who stepped down on {D1}.",
        "{P1} has been named as the new head of {O1}.",
    ),
    (
        "A court in {G1} has fined {O1} {M1} for breaching safety rules, prosecutor {P1} told reporters.",
        "{O1} has been fined {M1} by a court in {G1} for breaching safety rules.",
    ),
    (
        "Police in {G1} say {C1} people were arrested after protests outside the offices of {O1} on {D1}.",
        "{C1} people were arrested after protests outside the offices of {O1} in {G1}, police say.",
    ),
    (
        "Shares in {O2} slipped while shares in {O1} rose {R1} after {P1} announced a takeover bid from {G1}.",
        "Shares in {O1} rose {R1} after a takeover bid was announced by {P1}.",
    ),
    (
        "{P2} said on Monday that {P1} would lead the {G1} office of {O1} from {D1}.",
        "{P1} will lead the {G1} office of {O1}, {P2} has confirmed.",
    ),
];

/// Sentences after the lead. `{X1}` repeats the lead entity; `{X2}` is a
/// distractor of the same type.
const FILLERS: &[&str] = &[
    "{P2} of {O2} said the decision had been expected for months.",
    "Shares in {O2} fell {R2} in early trading.",
    "Last year {O2} reported profits of {M2}.",
    "Analysts in {G2} described the move as cautious.",
    "The plan was first discussed at a meeting in {G2} on {D2}.",
    "{P1} has worked at {O1} for more than a decade.",
    "About {C2} people attended a briefing in {G2}.",
    "{P2} told local radio that {O1} had declined to comment further.",
    "Rivals such as {O2} have made similar announcements.",
    "A spokesperson for {O1} said further details would follow.",
    "Union leader {P2} called the news a blow for workers in {G2}.",
    "The figures were published by the statistics office in {G2}.",
    "Earlier, {O2} warned that costs had risen by {R2}.",
    "The company employs {C2} staff across {G2} and nearby towns.",
    "{P2} is expected to visit {G1} on {D2}.",
    "A similar project in {G2} cost {M2}.",
];

#[derive(Debug, Clone)]
struct Slots(BTreeMap<&'static str, String>);

impl Slots {
    fn fill(&self, template: &str) -> String {
        let mut out = template.to_string();
        for (k, v) in &self.0 {
            out = out.replace(&format!("{{{k}}}"), v);
        }
        debug_assert!(!out.contains('{'), "unfilled slot in {out}");
        out
    }
}

fn person(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}", FIRST_NAMES.choose(rng).unwrap(), SURNAMES.choose(rng).unwrap())
}

fn date(rng: &mut ChaCha8Rng) -> String {
    format!("{} {} {}", rng.gen_range(1..=28), MONTHS.choose(rng).unwrap(), rng.gen_range(2009..=2023))
}

fn money(rng: &mut ChaCha8Rng) -> String {
    let cur = ["$", "£", "€"].choose(rng).unwrap();
    if rng.gen_bool(0.5) {
        format!("{cur}{}.{}m", rng.gen_range(2..=95), rng.gen_range(1..=9))
    } else {
        format!("{cur}{}bn", rng.gen_range(2..=40))
    }
}

fn count(rng: &mut ChaCha8Rng) -> String {
    let n: u32 = rng.gen_range(13..=4800);
    if n >= 1000 {
        format!("{},{:03}", n / 1000, n % 1000)
    } else {
        n.to_string()
    }
}

fn percent(rng: &mut ChaCha8Rng) -> String {
    format!("{}.{}%", rng.gen_range(2..=19), rng.gen_range(1..=9))
}

/// Draws a value of the slot's type that differs from every value in `taken`.
fn draw(kind: char, rng: &mut ChaCha8Rng, taken: &HashSet<String>) -> String {
    let names_used = |v: &str| taken.iter().any(|t| t.split(' ').any(|w| v.split(' ').any(|x| x == w)));
    loop {
        let v = match kind {
            'P' => person(rng),
            'O' => ORGS.choose(rng).unwrap().to_string(),
            'G' => GPES.choose(rng).unwrap().to_string(),
            'D' => date(rng),
            'M' => money(rng),
            'C' => count(rng),
            'R' => percent(rng),
            _ => unreachable!("unknown slot kind {kind}"),
        };
        // Names share no token with other names and numbers differ in
        // their digits, so no two values normalize alike.
        let clash = match kind {
            'P' | 'O' | 'G' => names_used(&v),
            _ => taken.iter().any(|t| shares_number(t, &v)),
        };
        if !clash {
            return v;
        }
    }
}

fn shares_number(a: &str, b: &str) -> bool {
    let runs = |s: &str| -> Vec<String> {
        s.split(|c: char| !c.is_ascii_digit()).filter(|r| !r.is_empty()).map(str::to_string).collect()
    };
    runs(a) == runs(b)
}

const SLOT_NAMES: &[&str] = &["P1", "P2", "O1", "O2", "G1", "G2", "D1", "D2", "M1", "M2", "C1", "C2", "R1", "R2"];

fn draw_slots(rng: &mut ChaCha8Rng, exclude: &HashSet<String>) -> Slots {
    let mut taken = exclude.clone();
    let mut map = BTreeMap::new();
    for name in SLOT_NAMES {
        let v = draw(name.chars().next().unwrap(), rng, &taken);
        taken.insert(v.clone());
        map.insert(*name, v);
    }
    Slots(map)
}

/// Gazetteers covering every name the generator can emit.
pub fn gazetteers() -> Vec<Gazetteer> {
    let people = FIRST_NAMES.iter().flat_map(|f| SURNAMES.iter().map(move |s| format!("{f} {s}")));
    vec![
        Gazetteer::new(EntityLabel::Person, people),
        Gazetteer::new(EntityLabel::Org, ORGS.iter()),
        Gazetteer::new(EntityLabel::Gpe, GPES.iter()),
    ]
}

/// The same gazetteers as `LABEL<TAB>name` lines.
pub fn write_gazetteer_tsv(path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut out = String::new();
    for g in gazetteers() {
        for name in &g.entries {
            out.push_str(&format!("{}\t{name}\n", g.label));
        }
    }
    std::fs::write(path, out)
}

pub fn recognizer() -> BuiltinRecognizer {
    BuiltinRecognizer::new(&gazetteers())
}

fn document(lead: &str, slots: &Slots, rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..=4);
    let mut sentences = vec![slots.fill(lead)];
    for f in FILLERS.choose_multiple(rng, n) {
        sentences.push(slots.fill(f));
    }
    sentences.join(" ")
}

/// `n` examples whose summary equals the reference and mentions only
/// document entities. Ids are `{prefix}{index:04}`.
pub fn clean_examples(n: usize, seed: u64, prefix: &str) -> Vec<Example> {
    let rec = recognizer();
    (0..n)
        .map(|i| {
            let id = format!("{prefix}{i:04}");
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &id));
            loop {
                let slots = draw_slots(&mut rng, &HashSet::new());
                let (lead, summary) = LEADS.choose(&mut rng).unwrap();
                let doc = document(lead, &slots, &mut rng);
                let summary = slots.fill(summary);
                let src = rec.recognize_text(&doc);
                let sum = rec.recognize_text(&summary);
                if !sum.is_empty() && find_hallucinated(&doc, &src, &sum).is_empty() {
                    let mut ex = Example::new(id.clone(), doc, summary.clone()).with_reference(summary);
                    ex.metadata = Some(BTreeMap::from([(GOLD_FLAG_KEY.to_string(), "false".to_string())]));
                    return ex;
                }
            }
        })
        .collect()
}

/// Record of one planted swap.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub id: String,
    pub label: EntityLabel,
    pub original: String,
    pub planted: String,
}

fn kind_of(label: EntityLabel) -> Option<char> {
    Some(match label {
        EntityLabel::Person => 'P',
        EntityLabel::Org => 'O',
        EntityLabel::Gpe => 'G',
        EntityLabel::Date => 'D',
        EntityLabel::Money => 'M',
        EntityLabel::Cardinal => 'C',
        EntityLabel::Percent => 'R',
        _ => return None,
    })
}

/// Replace one summary mention per example with a same-typed value absent
/// from the document. Every plant is checked to be the one and only
/// flagged mention of the new summary. The reference keeps the original
/// text and the gold flag is set.
pub fn plant_hallucinations(examples: &[Example], seed: u64) -> (Vec<Example>, Vec<Plant>) {
    let rec = recognizer();
    let mut out = Vec::with_capacity(examples.len());
    let mut plants = Vec::with_capacity(examples.len());
    for ex in examples {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("plant:{}", ex.id)));
        let src = rec.recognize_text(&ex.document);
        let sum = rec.recognize_text(&ex.summary);
        let targets: Vec<&EntityMention> = sum.iter().filter(|m| kind_of(m.label).is_some()).collect();
        assert!(!targets.is_empty(), "example {} has no plantable mention", ex.id);
        let taken: HashSet<String> = src.iter().map(|m| m.surface.clone()).collect();
        let (planted_ex, plant) = loop {
            let target = *targets.choose(&mut rng).unwrap();
            let value = draw(kind_of(target.label).unwrap(), &mut rng, &taken);
            let Some(text) = splice(&ex.summary, &[(target.start, target.end, &value)]) else {
                continue;
            };
            let new_mentions = rec.recognize_text(&text);
            let flagged = find_hallucinated(&ex.document, &src, &new_mentions);
            let ok = flagged.len() == 1
                && flagged[0].surface == value
                && flagged[0].label == target.label
                && new_mentions.len() == sum.len();
            if ok {
                let mut planted = ex.clone();
                planted.summary = text;
                planted.reference = Some(ex.summary.clone());
                planted
                    .metadata
                    .get_or_insert_with(BTreeMap::new)
                    .insert(GOLD_FLAG_KEY.to_string(), "true".to_string());
                break (
                    planted,
                    Plant { id: ex.id.clone(), label: target.label, original: target.surface.clone(), planted: value },
                );
            }
        };
        out.push(planted_ex);
        plants.push(plant);
    }
    (out, plants)
}

/// Gold flags from example metadata; examples without the key are skipped.
pub fn gold_flags(examples: &[Example]) -> std::collections::HashMap<String, bool> {
    examples
        .iter()
        .filter_map(|e| {
            let v = e.metadata.as_ref()?.get(GOLD_FLAG_KEY)?;
            Some((e.id.clone(), v == "true"))
        })
        .collect()
}

/// The example behind the classic date hallucination: the summary's year
/// appears nowhere in the document, which gives the correct date once.
pub fn ban_ki_moon_example() -> Example {
    Example::new(
        "ban-ki-moon",
        "He was re-elected for a second term by the UN General Assembly, unopposed and unanimously, on 21 June 2011, with effect from 1 January 2012. Mr. Ban describes his priorities as mobilising world leaders to deal with climate change, economic upheaval, pandemics and increasing pressures involving food, energy and water.",
        "The United Nations Secretary-General Ban Ki-moon was elected for a second term in 2007.",
    )
    .with_reference("The United Nations Secretary-General Ban Ki-moon was elected for a second term in 21 June 2011.")
}
