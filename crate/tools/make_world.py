#!/usr/bin/env python3
"""Regenerates crates/core/data/world.tsv, the bundled triple store.

The world is synthetic: real place names with invented figures, invented
people and films. Output is deterministic for a given seed.
"""
import random
import sys

SEED = 20231

COUNTRIES = [
    ("United States", "North America"), ("Canada", "North America"), ("Mexico", "North America"),
    ("France", "Europe"), ("Germany", "Europe"), ("Italy", "Europe"), ("Spain", "Europe"),
    ("Portugal", "Europe"), ("Serbia", "Europe"), ("Switzerland", "Europe"), ("Belgium", "Europe"),
    ("Netherlands", "Europe"), ("Austria", "Europe"), ("Poland", "Europe"), ("Sweden", "Europe"),
    ("Norway", "Europe"), ("Ireland", "Europe"), ("United Kingdom", "Europe"),
    ("Japan", "Asia"), ("China", "Asia"), ("India", "Asia"), ("South Korea", "Asia"),
    ("Thailand", "Asia"), ("Vietnam", "Asia"), ("Brazil", "South America"),
    ("Argentina", "South America"), ("Chile", "South America"), ("Peru", "South America"),
    ("Australia", "Oceania"), ("New Zealand", "Oceania"), ("Egypt", "Africa"),
    ("Kenya", "Africa"), ("Morocco", "Africa"), ("Nigeria", "Africa"),
]

CITIES = {
    "United States": ["St. Louis", "Eau Claire", "Billings", "Juneau", "Des Arc", "Van Buren",
                      "Dolton", "Lewistown", "Saunemin", "Iola", "Lambert", "Lucerne",
                      "Pierpont", "Bellerive", "Huey", "San Jose", "Old Shawneetown",
                      "Southern View", "Belle Prairie City", "La Prairie", "Montclare",
                      "Fredericton Junction", "Boise", "Tulsa", "Omaha", "Savannah", "Spokane",
                      "Duluth", "Fargo", "Helena", "Cheyenne", "Santa Fe", "Little Rock",
                      "Montpelier", "Augusta", "Concord", "Dover", "Trenton", "Albany", "Salem"],
    "Canada": ["Calgary", "Fredericton", "Halifax", "Regina", "Saskatoon", "Kelowna", "Moncton"],
    "Mexico": ["Oaxaca", "Puebla", "Merida", "Toluca"],
    "France": ["Lyon", "Lille", "Nantes", "Rennes", "La Loge", "Colmar"],
    "Germany": ["Bremen", "Leipzig", "Dresden", "Freiburg"],
    "Italy": ["Turin", "Bologna", "Genoa", "Verona"],
    "Spain": ["Seville", "Bilbao", "Valencia", "Granada"],
    "Portugal": ["Porto", "Braga", "Coimbra"],
    "Serbia": ["Belgrade", "Novi Sad", "Nis"],
    "Switzerland": ["Bern", "Lucerne City", "Lugano"],
    "Belgium": ["Ghent", "Bruges", "Liege"],
    "Netherlands": ["Utrecht", "Leiden", "Delft"],
    "Austria": ["Graz", "Linz", "Salzburg"],
    "Poland": ["Krakow", "Gdansk", "Poznan"],
    "Sweden": ["Uppsala", "Malmo", "Lund"],
    "Norway": ["Bergen", "Tromso", "Trondheim"],
    "Ireland": ["Cork", "Galway", "Limerick"],
    "United Kingdom": ["Leeds", "Bristol", "York", "Bath"],
    "Japan": ["Sapporo", "Sendai", "Nagoya", "Kobe"],
    "China": ["Chengdu", "Xiamen", "Harbin"],
    "India": ["Pune", "Jaipur", "Kochi"],
    "South Korea": ["Busan", "Daegu", "Gwangju"],
    "Thailand": ["Chiang Mai", "Khon Kaen"],
    "Vietnam": ["Hue", "Da Nang"],
    "Brazil": ["Recife", "Curitiba", "Manaus"],
    "Argentina": ["Rosario", "Mendoza", "Cordoba"],
    "Chile": ["Valparaiso", "Temuco"],
    "Peru": ["Cusco", "Arequipa"],
    "Australia": ["Hobart", "Darwin", "Cairns"],
    "New Zealand": ["Dunedin", "Nelson"],
    "Egypt": ["Luxor", "Aswan"],
    "Kenya": ["Mombasa", "Kisumu"],
    "Morocco": ["Fez", "Tangier"],
    "Nigeria": ["Ibadan", "Enugu"],
}

FIRST = ["Corey", "Joaquim", "Bruno", "Valeria", "Hector", "Roly", "Lima", "Regina", "Gilberto",
         "David", "Allison", "Rolando", "Dany", "Jorge", "Isabel", "Hans", "Ion", "Giorgio",
         "Alessia", "Roland", "Max", "Matthias", "Harry", "Ramon", "Slaven", "Sabine", "Sam",
         "Brian", "Frederik", "Eugie", "Robert", "Ursula", "Fritz", "Samuel", "Marta", "Ingrid",
         "Tomas", "Lena", "Oskar", "Nadia", "Kenji", "Aiko", "Pablo", "Lucia", "Anton", "Greta",
         "Emil", "Clara", "Victor", "Elena"]
LAST = ["Yuen", "Sapinho", "Dumont", "Tedeschi", "Calori", "Serrano", "Duarte", "Case", "Gil",
        "Grieco", "Janney", "Villazon", "Boon", "Juan", "Burman", "Gabella", "Gobbi", "Barela",
        "Verhavert", "Thayer", "Hues", "Beaumont", "Novarro", "Dolo", "Timoteo", "Louwyck",
        "Aldiss", "Pohl", "Foster", "Silverberg", "Leiber", "Delany", "Varga", "Lindqvist",
        "Halloran", "Moreau", "Kowalski", "Brandt", "Okafor", "Tanaka", "Ferreira", "Rossi",
        "Novak", "Larsen", "Quiroga", "Haas", "Petrov", "Dubois", "Mendes", "Castell"]
OCCUPATIONS = ["film director", "actor", "screenwriter", "novelist", "composer", "painter"]
AWARDS = ["Nebula Award for Best Novella", "Hugo Award for Best Novelette", "Golden Lion",
          "Palme d'Or", "Silver Bear", "Goya Award for Best Director", "Cesar Award for Best Film",
          "Locus Award for Best Novel", "Golden Shell", "Crystal Globe", "Golden Leopard",
          "Geffen Award"]
GENRES = ["drama film", "comedy film", "thriller film", "documentary film", "science fiction film",
          "biographical film", "western film", "animated film"]
ADJ = ["Silent", "Red", "Forbidden", "Open", "Summer", "Winter", "Hidden", "Last", "Broken",
       "Golden", "Distant", "Quiet", "Wild", "Lost", "Bright", "Hollow", "Iron", "Velvet",
       "Northern", "Burning"]
NOUN = ["Harbor", "Dust", "Hours", "Eyes", "Games", "Frontier", "Garden", "Signal", "Mirror",
        "River", "Orchard", "Lantern", "Station", "Canyon", "Letters", "Tide", "Crown", "Passage",
        "Meadow", "Engine"]


def fmt_area(rng):
    return f"{rng.uniform(0.1, 9000):.6f}"


def main(out):
    rng = random.Random(SEED)
    triples = []
    add = lambda h, r, t: triples.append((h, r, str(t)))

    cities = []
    for country, continent in COUNTRIES:
        add(country, "continent", continent)
        add(country, "area", f"{rng.randint(20000, 9800000)}")
        add(country, "population", f"{rng.randint(400000, 300000000)}")
        names = CITIES[country]
        add(country, "capital", names[0])
        for c in names:
            cities.append(c)
            add(c, "country", country)
            add(c, "area", fmt_area(rng))
            add(c, "population", f"{rng.randint(300, 2500000)}")
            add(c, "population (point in time)", f"{rng.randint(1990, 2022)}")
            add(c, "elevation", f"{rng.randint(2, 2800)} metres")

    people = []
    seen = set()
    while len(people) < 220:
        name = f"{rng.choice(FIRST)} {rng.choice(LAST)}"
        if name in seen:
            continue
        seen.add(name)
        people.append(name)
    directors = people[:90]
    for i, p in enumerate(people):
        occ = "film director" if i < 90 else rng.choice(OCCUPATIONS[1:])
        add(p, "occupation", occ)
        add(p, "place of birth", rng.choice(cities))
        if rng.random() < 0.5:
            add(p, "place of death", rng.choice(cities))
        add(p, "date of birth", f"{rng.randint(1920, 1995)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}")
        if rng.random() < 0.4:
            add(p, "award received", rng.choice(AWARDS))
            add(p, "award received (point in time)", f"{rng.randint(1960, 2022)}")

    titles = ["Veronica Mars", "Rambo III", "Rambo", "Back on Track", "Slack Bay", "Fierro",
              "Me You Them", "Come What May", "The Rewrite", "Humidity", "The Wonders", "Rango"]
    tseen = set(titles)
    while len(titles) < 230:
        t = f"{rng.choice(ADJ)} {rng.choice(NOUN)}"
        if rng.random() < 0.4:
            t = "The " + t
        if t in tseen:
            continue
        tseen.add(t)
        titles.append(t)
    # sequels
    films = list(titles)
    sequel_of = {"Rambo": "Rambo III"}
    for base in rng.sample(titles[3:], 30):
        seq = f"{base} II"
        if seq in tseen:
            continue
        tseen.add(seq)
        films.append(seq)
        sequel_of[seq] = base

    # each director gets 1..4 films; the rest are spread randomly
    director_of = {}
    order = list(films)
    rng.shuffle(order)
    pos = 0
    for d in directors:
        k = rng.choice([1, 1, 2, 2, 3, 4])
        for f in order[pos:pos + k]:
            director_of[f] = d
        pos += k
        if pos >= len(order):
            break
    for f in order[pos:]:
        director_of[f] = rng.choice(directors)

    countries = [c for c, _ in COUNTRIES]
    for f in films:
        add(f, "director", director_of[f])
        add(f, "duration", f"{rng.randint(70, 190)} minutes")
        add(f, "release date", f"{rng.randint(1927, 2022)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}")
        add(f, "genre", rng.choice(GENRES))
        add(f, "country of origin", rng.choice(countries))
        for p in rng.sample(people[90:], 2):
            add(f, "cast member", p)
        if f in sequel_of:
            add(f, "follows", sequel_of[f])
        if rng.random() < 0.3:
            add(f, "award received", rng.choice(AWARDS))
            add(f, "award received (point in time)", f"{rng.randint(1960, 2022)}")

    uniq = []
    s = set()
    for t in triples:
        if t not in s:
            s.add(t)
            uniq.append(t)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# head\trelation\ttail\n")
        for h, r, t in uniq:
            fh.write(f"{h}\t{r}\t{t}\n")
    print(f"{len(uniq)} triples", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data/world.tsv")
