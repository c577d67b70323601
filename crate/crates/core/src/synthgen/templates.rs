//! Program and question templates. Each template draws anchors from the
//! store and returns an ungrounded program with its question text.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::store::TripleStore;
use crate::model::{Direction, GoldenProgram, Op, Order, QuestionType, StructureClass, TripleSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Template {
    LookUp,
    PathQuery,
    CheckFact,
    CheckPath,
    FilmsByDirector,
    AwardedFilmsByDirector,
    CastSize,
    CastBirthplaces,
    CompareAttr,
    ComparePath,
    AwardYear,
    PathQualifier,
}

impl Template {
    /// Templates able to produce each structure class. Classes of
    /// variable-arity templates are only known after grounding.
    pub fn for_class(class: StructureClass) -> &'static [Template] {
        use Template::*;
        match class {
            StructureClass::ScSh => &[LookUp, CheckFact, FilmsByDirector, AwardYear],
            StructureClass::ScMh => &[PathQuery, CheckPath, PathQualifier, AwardedFilmsByDirector],
            StructureClass::McSh => &[CompareAttr, FilmsByDirector, CastSize],
            StructureClass::McMh => &[ComparePath, CastBirthplaces, AwardedFilmsByDirector],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Template::LookUp => "look-up",
            Template::PathQuery => "path-query",
            Template::CheckFact => "check-fact",
            Template::CheckPath => "check-path",
            Template::FilmsByDirector => "films-by-director",
            Template::AwardedFilmsByDirector => "awarded-films-by-director",
            Template::CastSize => "cast-size",
            Template::CastBirthplaces => "cast-birthplaces",
            Template::CompareAttr => "compare-attr",
            Template::ComparePath => "compare-path",
            Template::AwardYear => "award-year",
            Template::PathQualifier => "path-qualifier",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Draft {
    pub program: GoldenProgram,
    pub question: String,
    pub question_type: QuestionType,
}

const FILM_ATTRS: [&str; 5] = ["director", "duration", "release date", "genre", "country of origin"];
const PERSON_ATTRS: [&str; 3] = ["occupation", "place of birth", "date of birth"];
const CITY_ATTRS: [&str; 4] = ["country", "area", "population", "elevation"];
const COUNTRY_ATTRS: [&str; 4] = ["continent", "capital", "area", "population"];

const FILM_PATHS: [&[&str]; 7] = [
    &["director", "place of birth"],
    &["director", "date of birth"],
    &["director", "place of birth", "country"],
    &["director", "place of birth", "country", "continent"],
    &["country of origin", "capital"],
    &["follows", "director"],
    &["follows", "director", "place of birth"],
];
const PERSON_PATHS: [&[&str]; 3] =
    [&["place of birth", "country"], &["place of birth", "country", "capital"], &["place of birth", "elevation"]];
const CITY_PATHS: [&[&str]; 3] =
    [&["country", "continent"], &["country", "capital"], &["country", "capital", "elevation"]];

/// Anchor pools derived once from the store.
#[derive(Debug, Clone)]
pub struct Pools {
    films: Vec<String>,
    sequels: Vec<String>,
    people: Vec<String>,
    cities: Vec<String>,
    countries: Vec<String>,
    directors: Vec<String>,
    awarded: Vec<String>,
    films_with_awarded_director: Vec<String>,
    cities_with_census: Vec<String>,
    people_with_census_birthplace: Vec<String>,
}

fn owned(v: Vec<&str>) -> Vec<String> {
    v.into_iter().map(str::to_string).collect()
}

impl Pools {
    pub fn new(store: &TripleStore) -> Self {
        let census = qualified("population");
        let award = qualified("award received");
        let films = owned(store.heads_with("director"));
        let people = owned(store.heads_with("occupation"));
        let films_with_awarded_director = films
            .iter()
            .filter(|f| store.outgoing(f, "director").iter().any(|t| store.has(t.tail(), &award)))
            .cloned()
            .collect();
        let people_with_census_birthplace = people
            .iter()
            .filter(|p| store.outgoing(p, "place of birth").iter().any(|t| store.has(t.tail(), &census)))
            .cloned()
            .collect();
        let mut directors: Vec<String> = store.with_relation("director").map(|t| t.tail().to_string()).collect();
        directors.sort();
        directors.dedup();
        Self {
            sequels: owned(store.heads_with("follows")),
            cities: owned(store.heads_with("country")),
            countries: owned(store.heads_with("continent")),
            awarded: owned(store.heads_with(&award)),
            cities_with_census: owned(store.heads_with(&census)),
            films,
            people,
            directors,
            films_with_awarded_director,
            people_with_census_birthplace,
        }
    }
}

fn qualified(attr: &str) -> String {
    crate::model::qualifier_relation(attr, "point in time")
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> Option<&'a T> {
    items.choose(rng)
}

fn relate(relation: &str) -> Op {
    Op::Relate { relation: relation.into(), direction: Direction::Forward }
}

/// "the r2 of the r1 of X"
fn phrase(anchor: &str, path: &[&str]) -> String {
    path.iter().fold(anchor.to_string(), |acc, r| format!("the {r} of {acc}"))
}

fn list(items: &[String]) -> String {
    match items {
        [a, b] => format!("{a} or {b}"),
        [init @ .., last] => format!("{}, or {last}", init.join(", ")),
        [] => String::new(),
    }
}

fn comparative(attr: &str, order: Order) -> &'static str {
    match (attr, order) {
        ("elevation", Order::Greater) => "higher",
        ("elevation", Order::Less) => "lower",
        ("duration", Order::Greater) => "longer",
        ("duration", Order::Less) => "shorter",
        (_, Order::Greater) => "larger",
        (_, Order::Less) => "smaller",
    }
}

fn anchor_with_attrs<'a>(pools: &'a Pools, rng: &mut ChaCha8Rng) -> Option<(&'a str, &'static [&'static str])> {
    let kinds: [(&[String], &'static [&'static str]); 4] = [
        (&pools.films, &FILM_ATTRS),
        (&pools.people, &PERSON_ATTRS),
        (&pools.cities, &CITY_ATTRS),
        (&pools.countries, &COUNTRY_ATTRS),
    ];
    let (pool, attrs) = kinds.choose(rng)?;
    Some((pick(rng, pool)?.as_str(), attrs))
}

fn anchor_with_path<'a>(pools: &'a Pools, rng: &mut ChaCha8Rng) -> Option<(&'a str, &'static [&'static str])> {
    let path: &'static [&'static str] =
        [&FILM_PATHS[..], &PERSON_PATHS[..], &CITY_PATHS[..]].choose(rng)?.choose(rng)?;
    let pool = match path[0] {
        "follows" => &pools.sequels,
        "director" | "country of origin" => &pools.films,
        "place of birth" => &pools.people,
        _ => &pools.cities,
    };
    Some((pick(rng, pool)?.as_str(), path))
}

fn chain(anchor: &str, path: &[&str]) -> Vec<Op> {
    std::iter::once(Op::Find { entity: anchor.into() }).chain(path.iter().map(|r| relate(r))).collect()
}

/// A yes/no target: the true value half the time, else another value the
/// relation takes somewhere in the store.
fn bool_target(store: &TripleStore, anchor: &str, path: &[&str], rng: &mut ChaCha8Rng) -> Option<String> {
    let mut values = vec![anchor.to_string()];
    for r in path {
        values = values.iter().flat_map(|v| store.outgoing(v, r)).map(|t| t.tail().to_string()).collect();
    }
    let truth = values.first()?.clone();
    if rng.gen_bool(0.5) {
        return Some(truth);
    }
    let mut others: Vec<&str> =
        store.with_relation(path.last()?).map(|t| t.tail()).filter(|v| !values.iter().any(|x| x == v)).collect();
    others.sort_unstable();
    others.dedup();
    Some(pick(rng, &others).map_or(truth, |s| s.to_string()))
}

pub fn draft(template: Template, store: &TripleStore, pools: &Pools, rng: &mut ChaCha8Rng) -> Option<Draft> {
    let (ops, question, question_type) = match template {
        Template::LookUp => {
            let (anchor, attrs) = anchor_with_attrs(pools, rng)?;
            let attr = *pick(rng, attrs)?;
            let p = phrase(anchor, &[attr]);
            let q = if rng.gen_bool(0.5) { format!("What is {p}?") } else { format!("Can you tell me {p}?") };
            let mut ops = chain(anchor, &[attr]);
            ops.push(Op::Query);
            (ops, q, QuestionType::Query)
        }
        Template::PathQuery => {
            let (anchor, path) = anchor_with_path(pools, rng)?;
            let p = phrase(anchor, path);
            let q = if rng.gen_bool(0.5) { format!("What is {p}?") } else { format!("Name {p}.") };
            let mut ops = chain(anchor, path);
            ops.push(Op::Query);
            (ops, q, QuestionType::Query)
        }
        Template::CheckFact | Template::CheckPath => {
            let (anchor, path) = if template == Template::CheckFact {
                let (anchor, attrs) = anchor_with_attrs(pools, rng)?;
                let attr: &'static [&'static str] = std::slice::from_ref(pick(rng, attrs)?);
                (anchor, attr)
            } else {
                anchor_with_path(pools, rng)?
            };
            let expected = bool_target(store, anchor, path, rng)?;
            let p = phrase(anchor, path);
            let q = if rng.gen_bool(0.5) {
                format!("Is {p} {expected}?")
            } else {
                format!("Is it true that {p} is {expected}?")
            };
            let mut ops = chain(anchor, path);
            ops.push(Op::VerifyBool { expected });
            (ops, q, QuestionType::Bool)
        }
        Template::FilmsByDirector | Template::AwardedFilmsByDirector => {
            let director = pick(rng, &pools.directors)?;
            let mut ops = vec![
                Op::Find { entity: director.clone() },
                Op::Relate { relation: "director".into(), direction: Direction::Backward },
            ];
            let q = if template == Template::FilmsByDirector {
                format!("How many films were directed by {director}?")
            } else {
                ops.push(Op::FilterAttr { attr: "award received".into() });
                format!("How many films directed by {director} received an award?")
            };
            ops.push(Op::Count);
            (ops, q, QuestionType::Count)
        }
        Template::CastSize => {
            let film = pick(rng, &pools.films)?;
            let mut ops = chain(film, &["cast member"]);
            ops.push(Op::Count);
            (ops, format!("How many cast members does {film} have?"), QuestionType::Count)
        }
        Template::CastBirthplaces => {
            let film = pick(rng, &pools.films)?;
            let mut ops = chain(film, &["cast member", "place of birth"]);
            ops.push(Op::Count);
            (ops, format!("In how many different places were the cast members of {film} born?"), QuestionType::Count)
        }
        Template::CompareAttr => {
            let (pool, attrs): (&[String], &[&str]) = *[
                (&pools.cities[..], &["area", "population", "elevation"][..]),
                (&pools.countries[..], &["area", "population"][..]),
                (&pools.films[..], &["duration"][..]),
            ]
            .choose(rng)?;
            let attr = *pick(rng, attrs)?;
            let arity = if rng.gen_bool(0.25) { 3 } else { 2 };
            let anchors: Vec<String> = pool.choose_multiple(rng, arity).cloned().collect();
            let order = if rng.gen_bool(0.5) { Order::Greater } else { Order::Less };
            let mut ops: Vec<Op> = anchors.iter().flat_map(|a| chain(a, &[attr])).collect();
            ops.push(Op::SelectBetween { attr: attr.into(), order });
            let q = format!("Which has the {} {attr}, {}?", comparative(attr, order), list(&anchors));
            (ops, q, QuestionType::Comparison)
        }
        Template::ComparePath => {
            let (pool, path, attrs): (&[String], &[&str], &[&str]) = *[
                (&pools.films[..], &["director", "place of birth"][..], &["area", "population", "elevation"][..]),
                (&pools.people[..], &["place of birth"][..], &["area", "population", "elevation"][..]),
                (&pools.cities[..], &["country"][..], &["area", "population"][..]),
            ]
            .choose(rng)?;
            let attr = *pick(rng, attrs)?;
            let arity = if rng.gen_bool(0.25) { 3 } else { 2 };
            let anchors: Vec<String> = pool.choose_multiple(rng, arity).cloned().collect();
            let order = if rng.gen_bool(0.5) { Order::Greater } else { Order::Less };
            let filter = rng.gen_bool(0.5);
            let mut ops = Vec::new();
            for a in &anchors {
                ops.extend(chain(a, path));
                ops.push(if filter { Op::FilterAttr { attr: attr.into() } } else { relate(attr) });
            }
            ops.push(Op::SelectBetween { attr: attr.into(), order });
            let phrases: Vec<String> = anchors.iter().map(|a| phrase(a, path)).collect();
            let q = format!("Which has the {} {attr}: {}?", comparative(attr, order), list(&phrases));
            (ops, q, QuestionType::Comparison)
        }
        Template::AwardYear => {
            let (anchor, attr) = if rng.gen_bool(0.5) {
                (pick(rng, &pools.awarded)?, "award received")
            } else {
                (pick(rng, &pools.cities_with_census)?, "population")
            };
            let ops = vec![
                Op::Find { entity: anchor.clone() },
                Op::QueryAttrQualifier { attr: attr.into(), qualifier: "point in time".into() },
            ];
            (ops, format!("What is the point in time of the {attr} of {anchor}?"), QuestionType::Qualifier)
        }
        Template::PathQualifier => {
            let (anchor, path, attr) = if rng.gen_bool(0.5) {
                (pick(rng, &pools.films_with_awarded_director)?, "director", "award received")
            } else {
                (pick(rng, &pools.people_with_census_birthplace)?, "place of birth", "population")
            };
            let mut ops = chain(anchor, &[path]);
            ops.push(Op::QueryAttrQualifier { attr: attr.into(), qualifier: "point in time".into() });
            let p = phrase(anchor, &[path]);
            (ops, format!("For the {attr} of {p}, what is the point in time?"), QuestionType::Qualifier)
        }
    };
    let program = GoldenProgram::new(ops).ok()?;
    Some(Draft { program, question, question_type })
}
