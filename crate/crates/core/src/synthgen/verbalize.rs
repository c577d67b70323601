use thiserror::Error;

use crate::model::Triple;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerbalizeError {
    #[error("nothing to verbalize")]
    Empty,
    #[error("bundled triples must share a head: {0:?} vs {1:?}")]
    MixedHeads(String, String),
}

/// (opening clause, follow-up clause) pairs; `{h}` and `{t}` are the head
/// and tail surface forms.
fn templates(relation: &str) -> &'static [(&'static str, &'static str)] {
    match relation {
        "area" => &[("{h} area is {t}", "its area is {t}"), ("{h} covers an area of {t}", "covers an area of {t}")],
        "population" => &[
            ("{h} has a population of {t}", "has a population of {t}"),
            ("The population of {h} is {t}", "its population is {t}"),
        ],
        "population (point in time)" => &[
            ("{h} population was counted in {t}", "its population was counted in {t}"),
            ("The population figure of {h} dates from {t}", "its population figure dates from {t}"),
        ],
        "elevation" => &[
            ("{h} lies at an elevation of {t}", "lies at an elevation of {t}"),
            ("The elevation of {h} is {t}", "its elevation is {t}"),
        ],
        "country" => &[("{h} is located in {t}", "is located in {t}"), ("{h} is a city in {t}", "lies in {t}")],
        "continent" => {
            &[("{h} is on the continent of {t}", "lies on the continent of {t}"), ("{h} lies in {t}", "lies in {t}")]
        }
        "capital" => &[
            ("The capital of {h} is {t}", "has {t} as its capital"),
            ("{h} has its capital at {t}", "has its capital at {t}"),
        ],
        "occupation" => &[("{h} works as a {t}", "works as a {t}"), ("{h} is known as a {t}", "is known as a {t}")],
        "place of birth" => {
            &[("{h} was born in {t}", "was born in {t}"), ("{h} is a native of {t}", "is a native of {t}")]
        }
        "place of death" => &[("{h} died in {t}", "died in {t}")],
        "date of birth" => {
            &[("{h} was born on {t}", "was born on {t}"), ("The birth date of {h} is {t}", "its birth date is {t}")]
        }
        "award received" => &[("{h} received the {t}", "received the {t}"), ("{h} won the {t}", "won the {t}")],
        "award received (point in time)" => &[
            ("{h} was honoured in {t}", "was honoured in {t}"),
            ("The award of {h} dates from {t}", "its award dates from {t}"),
        ],
        "director" => &[("{h} was directed by {t}", "was directed by {t}"), ("{t} directed {h}", "was made by {t}")],
        "duration" => {
            &[("{h} runs for {t}", "runs for {t}"), ("The running time of {h} is {t}", "has a running time of {t}")]
        }
        "release date" => {
            &[("{h} was released on {t}", "was released on {t}"), ("{h} premiered on {t}", "premiered on {t}")]
        }
        "genre" => &[("{h} is a {t}", "is a {t}"), ("The genre of {h} is {t}", "belongs to the genre {t}")],
        "country of origin" => {
            &[("{h} was produced in {t}", "was produced in {t}"), ("{h} comes from {t}", "comes from {t}")]
        }
        "cast member" => &[("{h} stars {t}", "stars {t}"), ("{t} appears in {h}", "features {t} in its cast")],
        "follows" => &[("{h} is the sequel to {t}", "follows {t}"), ("{h} follows {t}", "is the sequel to {t}")],
        _ => &[],
    }
}

fn fill(template: &str, t: &Triple) -> String {
    template.replace("{h}", t.head()).replace("{t}", t.tail())
}

/// Renders one sentence covering every triple of a same-head bundle.
/// Clause `i` uses template variant `(seed + i) % n`; follow-up clauses
/// are joined with ", and it" (or ", and" before "its").
pub fn verbalize(triples: &[Triple], seed: u64) -> Result<String, VerbalizeError> {
    let first = triples.first().ok_or(VerbalizeError::Empty)?;
    if let Some(other) = triples.iter().find(|t| t.head() != first.head()) {
        return Err(VerbalizeError::MixedHeads(first.head().into(), other.head().into()));
    }
    let mut out = String::new();
    for (i, t) in triples.iter().enumerate() {
        let options = templates(t.relation());
        let clause = if options.is_empty() {
            if i == 0 {
                format!("{}'s {} is {}", t.head(), t.relation(), t.tail())
            } else {
                format!("its {} is {}", t.relation(), t.tail())
            }
        } else {
            let (open, follow) = options[(seed.wrapping_add(i as u64) % options.len() as u64) as usize];
            fill(if i == 0 { open } else { follow }, t)
        };
        if i > 0 {
            out.push_str(if clause.starts_with("its ") { ", and " } else { ", and it " });
            out.push_str(&clause);
        } else {
            out.push_str(&clause);
        }
    }
    out.push('.');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(h: &str, r: &str, tail: &str) -> Triple {
        Triple::new(h, r, tail).unwrap()
    }

    #[test]
    fn exemplar_sentence() {
        assert_eq!(verbalize(&[t("St. Louis", "area", "171.128084")], 0).unwrap(), "St. Louis area is 171.128084.");
    }

    #[test]
    fn bundles_cover_every_surface_form() {
        let bundle =
            [t("Rambo", "director", "Lima Barela"), t("Rambo", "duration", "188 minutes"), t("Rambo", "mood", "grim")];
        for seed in 0..4 {
            let s = verbalize(&bundle, seed).unwrap();
            for x in ["Rambo", "Lima Barela", "188 minutes", "grim"] {
                assert!(s.contains(x), "{s}");
            }
            assert_eq!(s, verbalize(&bundle, seed).unwrap());
            assert_eq!(s.matches(", and ").count(), 2);
        }
    }

    #[test]
    fn unknown_relations_fall_back() {
        assert_eq!(verbalize(&[t("A", "mood", "grim")], 3).unwrap(), "A's mood is grim.");
        assert_eq!(
            verbalize(&[t("A", "mood", "grim"), t("A", "colour", "red")], 0).unwrap(),
            "A's mood is grim, and its colour is red."
        );
    }

    #[test]
    fn rejects_bad_bundles() {
        assert_eq!(verbalize(&[], 0), Err(VerbalizeError::Empty));
        assert!(matches!(verbalize(&[t("A", "r", "x"), t("B", "r", "x")], 0), Err(VerbalizeError::MixedHeads(..))));
    }
}
