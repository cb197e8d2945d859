#!/usr/bin/env python3
"""Regenerates ontology.json and db.json for the default restaurant domain.

The database is synthetic but shaped like the Cambridge restaurant domain:
99 entities, 3 informable slots, and a handful of food types that no
entity serves (so the no-match path is reachable).
"""
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

FOODS_SERVED = [
    "chinese", "indian", "italian", "european", "modern european", "british",
    "french", "thai", "vietnamese", "korean", "japanese", "gastropub",
    "mediterranean", "spanish", "turkish", "lebanese", "african",
    "portuguese", "north american", "international", "asian oriental",
    "seafood",
]
FOODS_UNSERVED = ["afghan", "creative", "english", "indonesian", "halal", "polish"]
AREAS = ["centre", "north", "south", "east", "west"]
PRICES = ["cheap", "moderate", "expensive"]

# Entities quoted in sample dialogues keep their attributes.
FIXED = [
    ("thanh binh", "vietnamese", "west", "cheap"),
    ("galleria", "european", "centre", "moderate"),
    ("sitar tandoori", "indian", "east", "expensive"),
    ("little seoul", "korean", "centre", "expensive"),
    ("curry prince", "indian", "east", "moderate"),
    ("royal standard", "gastropub", "east", "expensive"),
    ("the good luck chinese food takeaway", "chinese", "south", "expensive"),
]

NAME_A = ["golden", "silver", "red", "blue", "green", "royal", "old", "little",
          "grand", "happy", "lucky", "jade", "copper", "velvet", "crystal",
          "amber", "ivory", "scarlet", "olive", "maple"]
NAME_B = ["lantern", "garden", "kitchen", "table", "spoon", "house", "palace",
          "corner", "bistro", "terrace", "lodge", "oven", "pantry", "harbour",
          "mill", "tavern", "grill", "courtyard", "cellar", "orchard"]
STREETS = ["bridge street", "mill road", "regent street", "hills road",
           "trumpington street", "king street", "newmarket road",
           "chesterton road", "histon road", "castle street", "market hill",
           "station road", "high street", "milton road", "cherry hinton road"]
DISTRICTS = ["city centre", "chesterton", "cherry hinton", "fen ditton",
             "newnham", "trumpington", "arbury", "romsey"]

SURFACE = {
    "food": ["type of food", "kind of food", "food type", "cuisine"],
    "pricerange": ["price range", "price", "budget"],
    "area": ["area", "part of town", "side of town", "location"],
    "name": ["name", "restaurant name"],
    "address": ["address"],
    "phone": ["phone number", "telephone number", "phone"],
    "postcode": ["postcode", "post code", "postal code"],
    "dontcare": ["any", "don't care", "dont care", "do not care",
                 "doesn't matter", "does not matter", "whatever"],
    "pricerange=moderate": ["moderate", "moderately priced", "mid priced"],
    "pricerange=cheap": ["cheap", "inexpensive", "cheaply priced"],
    "pricerange=expensive": ["expensive", "upscale", "expensively priced"],
    "area=centre": ["centre", "center", "city centre", "town centre"],
    "food=north american": ["north american", "american"],
    "food=asian oriental": ["asian oriental", "oriental"],
}


def main():
    rng = random.Random(2017)
    entities = []
    used_names = set()
    for name, food, area, price in FIXED:
        used_names.add(name)
        entities.append((name, food, area, price))
    combos = [(a, b) for a in NAME_A for b in NAME_B]
    rng.shuffle(combos)
    ci = 0
    # Guarantee each served food appears at least twice.
    foods = []
    for f in FOODS_SERVED:
        foods += [f, f]
    while len(foods) < 99 - len(FIXED):
        foods.append(rng.choice(FOODS_SERVED[:8]))
    rng.shuffle(foods)
    for food in foods:
        a, b = combos[ci]
        ci += 1
        name = f"the {a} {b}"
        entities.append((name, food, rng.choice(AREAS), rng.choice(PRICES)))
    records = []
    phones = set()
    for i, (name, food, area, price) in enumerate(entities):
        while True:
            phone = f"01223 {rng.randint(200000, 899999)}"
            if phone not in phones:
                phones.add(phone)
                break
        num = rng.randint(1, 300)
        addr = f"{num} {rng.choice(STREETS)} {rng.choice(DISTRICTS)}"
        pc = f"cb{rng.randint(1, 5)}{rng.randint(1, 9)}{rng.choice('abdefghjlnpqrstuwxyz')}{rng.choice('abdefghjlnpqrstuwxyz')}"
        records.append({
            "name": name, "food": food, "area": area, "pricerange": price,
            "address": addr, "phone": phone, "postcode": pc,
        })
    ontology = {
        "informable": {
            "food": FOODS_SERVED + FOODS_UNSERVED,
            "pricerange": PRICES,
            "area": AREAS,
        },
        "requestable": ["food", "pricerange", "area", "name", "address",
                        "phone", "postcode"],
        "surface_forms": SURFACE,
    }
    with open(os.path.join(HERE, "ontology.json"), "w") as f:
        json.dump(ontology, f, indent=2)
        f.write("\n")
    with open(os.path.join(HERE, "db.json"), "w") as f:
        json.dump(records, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
