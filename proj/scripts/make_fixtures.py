#!/usr/bin/env python3
"""Generate the fixture chorale corpus (data/chorales/*.json).

Each fixture is a four-part setting of a public-domain hymn tune produced by
a small rule-based harmonizer: a quarter-note harmonic grid, diatonic triads
chosen to contain the melody note (with cadence preferences), root-position
bass, and nearest-tone voice leading for alto/tenor. Chord annotations are
written alongside the voices, so the corpus ships pre-labeled.

Run from the repo root:  python3 scripts/make_fixtures.py
"""

import json
import os
import random

FRAMES_PER_QUARTER = 4

# degree -> semitone offsets of the triad root relative to the tonic
MAJOR_TRIADS = {
    "I": (0, [0, 4, 7]),
    "ii": (2, [0, 3, 7]),
    "iii": (4, [0, 3, 7]),
    "IV": (5, [0, 4, 7]),
    "V": (7, [0, 4, 7]),
    "vi": (9, [0, 3, 7]),
}
MINOR_TRIADS = {
    "i": (0, [0, 3, 7]),
    "iv": (5, [0, 3, 7]),
    "V": (7, [0, 4, 7]),  # harmonic minor dominant
    "VI": (8, [0, 4, 7]),
    "III": (3, [0, 4, 7]),
    "VII": (10, [0, 4, 7]),
}

MAJOR_PREFERENCE = ["I", "V", "IV", "ii", "vi", "iii"]
MINOR_PREFERENCE = ["i", "V", "iv", "VI", "VII", "III"]

SYMBOL_NAMES = ["C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"]


def chord_pcs(tonic, name, table):
    root_off, intervals = table[name]
    root = (tonic + root_off) % 12
    return root, sorted((root + iv) % 12 for iv in intervals)


def chord_symbol(root, pcs):
    rel = sorted((pc - root) % 12 for pc in pcs)
    if rel == [0, 4, 7]:
        return SYMBOL_NAMES[root]
    if rel == [0, 3, 7]:
        return SYMBOL_NAMES[root] + "m"
    if rel == [0, 3, 6]:
        return SYMBOL_NAMES[root] + "dim"
    return ".".join(SYMBOL_NAMES[p] for p in pcs)


def nearest_octave(pc, around, lo, hi):
    """MIDI pitch with class pc closest to `around`, clamped to [lo, hi]."""
    best = None
    for octave in range(11):
        midi = octave * 12 + pc
        if midi < lo or midi > hi:
            continue
        if best is None or abs(midi - around) < abs(best - around):
            best = midi
    if best is None:
        best = max(lo, min(hi, around))
        best += (pc - best) % 12
        if best > hi:
            best -= 12
    return best


def harmonize_tune(tune, rng):
    """Return (voices dict, chords list, fermata frames, total_frames)."""
    tonic = tune["tonic"]
    table = MINOR_TRIADS if tune.get("minor") else MAJOR_TRIADS
    preference = MINOR_PREFERENCE if tune.get("minor") else MAJOR_PREFERENCE
    tonic_name = "i" if tune.get("minor") else "I"
    dominant_name = "V"

    soprano = []
    fermata_frames = []
    frame = 0
    for midi, quarters, fermata in tune["melody"]:
        dur = quarters * FRAMES_PER_QUARTER
        soprano.append({"onset": frame, "duration": dur, "pitch": midi})
        if fermata:
            fermata_frames.extend(range(frame, frame + dur))
        frame += dur
    total_frames = frame
    assert total_frames % FRAMES_PER_QUARTER == 0

    def melody_at(f):
        for ev in soprano:
            if ev["onset"] <= f < ev["onset"] + ev["duration"]:
                return ev["pitch"]
        return soprano[-1]["pitch"]

    slots = total_frames // FRAMES_PER_QUARTER
    names = []
    substitute = tune.get("substitute", {})
    for slot in range(slots):
        melody_pc = melody_at(slot * FRAMES_PER_QUARTER) % 12
        candidates = [n for n in preference
                      if melody_pc in chord_pcs(tonic, n, table)[1]]
        if not candidates:
            candidates = [tonic_name]
        if slot == slots - 1:
            pick = tonic_name if tonic_name in candidates else candidates[0]
        elif slot == slots - 2 and dominant_name in candidates:
            pick = dominant_name
        else:
            pick = candidates[0]
            # keep the harmony moving: avoid three identical slots in a row
            if len(names) >= 2 and names[-1] == names[-2] == pick and len(candidates) > 1:
                pick = candidates[1]
            elif len(candidates) > 1 and rng.random() < 0.25:
                pick = candidates[1]
        if pick in substitute and substitute[pick] in table:
            sub = substitute[pick]
            if melody_pc in chord_pcs(tonic, sub, table)[1] and slot < slots - 2:
                pick = sub
        names.append(pick)

    chords = []
    for slot, name in enumerate(names):
        root, pcs = chord_pcs(tonic, name, table)
        onset = slot * FRAMES_PER_QUARTER
        if chords and chords[-1]["pitch_classes"] == pcs:
            continue
        chords.append({"onset": onset, "pitch_classes": pcs,
                       "symbol": chord_symbol(root, pcs)})

    alto, tenor, bass = [], [], []
    prev = {"alto": 67, "tenor": 57, "bass": 48}
    for slot, name in enumerate(names):
        onset = slot * FRAMES_PER_QUARTER
        root, pcs = chord_pcs(tonic, name, table)
        sop = melody_at(onset)

        b = nearest_octave(root, prev["bass"], 38, 57)
        others = [pc for pc in pcs if pc != root] or pcs
        t_choices = [nearest_octave(pc, prev["tenor"], b + 2, min(sop - 2, 67))
                     for pc in pcs]
        t = min(t_choices, key=lambda m: abs(m - prev["tenor"]))
        remaining = [pc for pc in pcs if pc != t % 12 and pc != sop % 12]
        if not remaining:
            remaining = [pc for pc in pcs if pc != t % 12] or pcs
        a_choices = [nearest_octave(pc, prev["alto"], t + 1, sop)
                     for pc in remaining]
        a = min(a_choices, key=lambda m: abs(m - prev["alto"]))
        if not (b < t < a <= sop):
            t = max(b + 2, min(t, a - 1))
        alto.append({"onset": onset, "duration": FRAMES_PER_QUARTER, "pitch": a})
        tenor.append({"onset": onset, "duration": FRAMES_PER_QUARTER, "pitch": t})
        bass.append({"onset": onset, "duration": FRAMES_PER_QUARTER, "pitch": b})
        prev = {"alto": a, "tenor": t, "bass": b}

    voices = {"soprano": soprano, "alto": alto, "tenor": tenor, "bass": bass}
    return voices, chords, sorted(set(fermata_frames)), total_frames


def n(midi, quarters, fermata=False):
    return (midi, quarters, fermata)


# Public-domain hymn tunes (melodies entered from the common hymnal versions,
# lightly simplified to the quarter/half grid).
TUNES = [
    {
        "name": "old_hundredth",
        "tonic": 7,  # G
        "time": [(0, 4, 4)],
        "melody": [
            n(67, 2), n(67, 1), n(66, 1), n(64, 2), n(62, 2),
            n(67, 2), n(69, 1), n(71, 1), n(72, 2, True), n(72, 2),
            n(72, 2), n(71, 1), n(69, 1), n(67, 2), n(71, 2),
            n(69, 1), n(67, 1), n(66, 2), n(67, 2, True), n(67, 2),
        ],
    },
    {
        "name": "old_hundredth_reharm",
        "tonic": 7,
        "time": [(0, 4, 4)],
        "substitute": {"I": "vi", "IV": "ii"},
        "melody": [
            n(67, 2), n(67, 1), n(66, 1), n(64, 2), n(62, 2),
            n(67, 2), n(69, 1), n(71, 1), n(72, 2, True), n(72, 2),
            n(72, 2), n(71, 1), n(69, 1), n(67, 2), n(71, 2),
            n(69, 1), n(67, 1), n(66, 2), n(67, 2, True), n(67, 2),
        ],
    },
    {
        "name": "ein_feste_burg",
        "tonic": 0,  # C
        "time": [(0, 4, 4)],
        "melody": [
            n(67, 1), n(67, 1), n(67, 1), n(64, 1),
            n(65, 1), n(67, 1), n(69, 1), n(67, 2, True),
            n(65, 1), n(64, 1), n(62, 1), n(64, 1),
            n(60, 1), n(62, 1), n(60, 2, True),
            n(67, 1), n(69, 1), n(71, 1), n(72, 1),
            n(71, 1), n(69, 1), n(67, 2, True),
            n(65, 1), n(64, 1), n(62, 1), n(60, 2, True), n(60, 1),
        ],
    },
    {
        "name": "nun_danket",
        "tonic": 5,  # F
        "time": [(0, 4, 4)],
        "melody": [
            n(65, 1), n(65, 1), n(67, 1), n(69, 1),
            n(69, 1), n(67, 1), n(69, 2, True),
            n(69, 1), n(72, 1), n(72, 1), n(70, 1),
            n(69, 1), n(67, 1), n(65, 2, True),
            n(65, 1), n(67, 1), n(69, 1), n(67, 1),
            n(65, 1), n(64, 1), n(65, 2, True), n(65, 2),
        ],
    },
    {
        "name": "lobe_den_herren",
        "tonic": 7,
        "time": [(0, 3, 4)],
        "melody": [
            n(67, 2), n(67, 1), n(71, 2), n(71, 1),
            n(74, 2), n(74, 1), n(72, 1), n(71, 1), n(69, 1),
            n(67, 3, True), n(67, 2), n(67, 1),
            n(66, 1), n(64, 1), n(66, 1), n(67, 3, True),
            n(71, 2), n(69, 1), n(67, 2), n(66, 1),
            n(64, 2), n(62, 1), n(67, 3, True),
        ],
    },
    {
        "name": "vom_himmel_hoch",
        "tonic": 0,
        "time": [(0, 4, 4)],
        "melody": [
            n(72, 1), n(71, 1), n(69, 1), n(71, 1),
            n(67, 1), n(69, 1), n(71, 2, True),
            n(71, 1), n(72, 1), n(71, 1), n(69, 1),
            n(67, 1), n(69, 1), n(67, 2, True),
            n(67, 1), n(65, 1), n(64, 1), n(67, 1),
            n(64, 1), n(62, 1), n(60, 2, True), n(60, 2),
        ],
    },
    {
        "name": "tallis_canon",
        "tonic": 7,
        "time": [(0, 4, 4)],
        "melody": [
            n(67, 1), n(67, 1), n(69, 1), n(71, 1),
            n(67, 1), n(67, 1), n(64, 1), n(64, 1),
            n(67, 1), n(66, 1), n(67, 2, True),
            n(67, 1), n(67, 1), n(67, 1), n(66, 1),
            n(64, 1), n(66, 1), n(67, 1), n(71, 1),
            n(69, 1), n(67, 1), n(67, 2, True),
        ],
    },
    {
        "name": "tallis_canon_reharm",
        "tonic": 7,
        "time": [(0, 4, 4)],
        "substitute": {"I": "vi", "V": "iii"},
        "melody": [
            n(67, 1), n(67, 1), n(69, 1), n(71, 1),
            n(67, 1), n(67, 1), n(64, 1), n(64, 1),
            n(67, 1), n(66, 1), n(67, 2, True),
            n(67, 1), n(67, 1), n(67, 1), n(66, 1),
            n(64, 1), n(66, 1), n(67, 1), n(71, 1),
            n(69, 1), n(67, 1), n(67, 2, True),
        ],
    },
    {
        "name": "austria",
        "tonic": 5,
        "time": [(0, 4, 4)],
        "melody": [
            n(69, 1), n(70, 1), n(72, 1), n(70, 1),
            n(74, 1), n(72, 1), n(70, 2, True),
            n(69, 1), n(67, 1), n(69, 1), n(70, 1),
            n(69, 1), n(65, 1), n(65, 2, True),
            n(67, 1), n(69, 1), n(70, 1), n(69, 1),
            n(67, 1), n(65, 1), n(67, 2, True),
            n(65, 1), n(67, 1), n(69, 1), n(62, 1), n(65, 2, True), n(65, 1),
        ],
    },
    {
        "name": "picardy",
        "tonic": 9,  # A minor
        "minor": True,
        "time": [(0, 4, 4)],
        "melody": [
            n(69, 1), n(69, 1), n(69, 1), n(71, 1),
            n(72, 1), n(71, 1), n(69, 2, True),
            n(69, 1), n(72, 1), n(74, 1), n(76, 1),
            n(76, 1), n(74, 1), n(76, 2, True),
            n(77, 1), n(76, 1), n(74, 1), n(72, 1),
            n(71, 1), n(69, 1), n(68, 1), n(69, 2, True), n(69, 1),
        ],
    },
    {
        "name": "jesu_meine_freude",
        "tonic": 4,  # E minor
        "minor": True,
        "time": [(0, 4, 4)],
        "melody": [
            n(71, 1), n(71, 1), n(71, 1), n(74, 1),
            n(72, 1), n(71, 1), n(69, 2, True),
            n(67, 1), n(69, 1), n(71, 1), n(72, 1),
            n(71, 1), n(69, 1), n(66, 1), n(64, 1, True),
            n(71, 1), n(71, 1), n(72, 1), n(74, 1),
            n(72, 1), n(71, 1), n(69, 1), n(67, 2, True), n(64, 2),
        ],
    },
    {
        "name": "new_britain",
        "tonic": 5,
        "time": [(0, 1, 4), (1, 3, 4)],  # quarter pickup into 3/4
        "melody": [
            n(60, 1),
            n(65, 2), n(69, 1),
            n(69, 2), n(67, 1),
            n(65, 2), n(62, 1),
            n(60, 2, True), n(60, 1),
            n(65, 2), n(69, 1),
            n(69, 2), n(67, 1),
            n(72, 3, True),
            n(72, 2), n(69, 1),
            n(72, 2), n(69, 1),
            n(67, 2), n(65, 1),
            n(60, 2, True), n(60, 1),
            n(65, 2), n(69, 1),
            n(69, 2), n(67, 1),
            n(65, 3, True), n(65, 3),
        ],
    },
    {
        "name": "duke_street",
        "tonic": 2,  # D
        "time": [(0, 4, 4)],
        "melody": [
            n(62, 1), n(64, 1), n(66, 1), n(67, 1),
            n(69, 2), n(69, 1), n(71, 1),
            n(74, 1), n(71, 1), n(69, 2, True),
            n(67, 1), n(66, 1), n(64, 1), n(67, 1),
            n(66, 1), n(64, 1), n(62, 2, True),
            n(69, 1), n(71, 1), n(74, 1), n(73, 1),
            n(71, 1), n(69, 1), n(67, 1), n(66, 1), n(62, 2, True), n(62, 2),
        ],
    },
    {
        "name": "winchester_old",
        "tonic": 0,
        "time": [(0, 4, 4)],
        "melody": [
            n(60, 1), n(64, 1), n(64, 1), n(62, 1),
            n(64, 1), n(67, 1), n(67, 2, True),
            n(69, 1), n(67, 1), n(65, 1), n(64, 1),
            n(62, 1), n(64, 1), n(60, 2, True),
            n(64, 1), n(62, 1), n(60, 1), n(64, 1),
            n(65, 1), n(64, 1), n(62, 2, True),
            n(64, 1), n(62, 1), n(60, 1), n(62, 1), n(60, 2, True), n(60, 2),
        ],
    },
]


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "data", "chorales")
    os.makedirs(out_dir, exist_ok=True)
    rng = random.Random(20240901)

    for tune in TUNES:
        voices, chords, fermatas, total = harmonize_tune(tune, rng)
        doc = {
            "format_version": 1,
            "divisions": FRAMES_PER_QUARTER,
            "time_signatures": [
                {"measure": m, "num": num, "den": den}
                for (m, num, den) in tune["time"]
            ],
            "voices": voices,
            "fermata_frames": fermatas,
            "chords": chords,
        }
        path = os.path.join(out_dir, tune["name"] + ".json")
        with open(path, "w") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
        print(f"{tune['name']}: {total} frames, {len(chords)} chords")


if __name__ == "__main__":
    main()
