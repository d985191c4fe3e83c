import json

import pytest

from numbergame.errors import InputError
from numbergame.stimuli import (
    RULE_LIKE,
    SIMILARITY_LIKE,
    SINGLETON,
    StimulusSet,
    classify,
    classify_all,
    expand_prefixes,
    load_stimulus_file,
    save_stimulus_file,
    tenenbaum99_sets,
)


class TestClassify:
    def test_rule_evoking_set(self, t99_100):
        s = StimulusSet("x", "tenenbaum99", (16, 8, 2, 64))
        assert classify(s, t99_100) == RULE_LIKE

    def test_similarity_evoking_set(self, t99_100):
        s = StimulusSet("x", "tenenbaum99", (16, 23, 19, 20))
        assert classify(s, t99_100) == SIMILARITY_LIKE

    def test_singleton(self, t99_100):
        s = StimulusSet("x", "tenenbaum99", (41,))
        assert classify(s, t99_100) == SINGLETON

    def test_broad_rule_does_not_count(self, t99_100):
        # all-even set inside a narrow span: "even numbers" has support
        # fraction 0.5, not strictly below the threshold, so the spread
        # criterion decides
        s = StimulusSet("x", "tenenbaum99", (22, 24, 26, 28))
        assert classify(s, t99_100) == SIMILARITY_LIKE

    def test_wide_unstructured_set_is_other(self, t99_100):
        s = StimulusSet("x", "tenenbaum99", (7, 52, 91, 24))
        assert classify(s, t99_100) == "other"

    def test_out_of_domain_number(self, t99_100):
        s = StimulusSet("x", "tenenbaum99", (16, 101))
        with pytest.raises(InputError):
            classify(s, t99_100)

    def test_thresholds_configurable(self, t99_100):
        s = StimulusSet("x", "tenenbaum99", (81, 98, 86, 93))  # spread 17
        assert classify(s, t99_100) == "other"
        assert classify(s, t99_100, spread=20) == SIMILARITY_LIKE


class TestExpand:
    def test_tenenbaum99_presentation_count(self, t99_100):
        sets = tenenbaum99_sets(t99_100)
        presentations = expand_prefixes(sets)
        assert len(presentations) == 26

    def test_category_counts(self, t99_100):
        presentations = expand_prefixes(tenenbaum99_sets(t99_100))
        by_cat = {}
        for p in presentations:
            by_cat[p.category] = by_cat.get(p.category, 0) + 1
        assert by_cat == {SINGLETON: 2, RULE_LIKE: 12, SIMILARITY_LIKE: 12}

    def test_prefixes_are_ordered(self, t99_100):
        sets = tenenbaum99_sets(t99_100)
        presentations = expand_prefixes(sets)
        by_id = {}
        for p in presentations:
            by_id.setdefault(p.stimulus_id, []).append(p)
        for s in sets:
            prefs = by_id[s.id]
            assert [p.n for p in prefs] == list(range(1, min(len(s.numbers), 4) + 1))
            for p in prefs:
                assert p.examples == s.numbers[: p.n]

    def test_singleton_expands_once(self):
        s = StimulusSet("x", "tenenbaum99", (41,))
        assert len(expand_prefixes([s])) == 1

    def test_long_set_capped_at_four(self):
        s = StimulusSet("x", "bigelow16", (2, 4, 6, 8, 10, 12))
        assert len(expand_prefixes([s])) == 4

    def test_expansion_deterministic(self, t99_100):
        a = expand_prefixes(tenenbaum99_sets(t99_100))
        b = expand_prefixes(tenenbaum99_sets(t99_100))
        assert a == b


class TestStimulusFiles:
    def test_round_trip(self, tmp_path):
        sets = [StimulusSet("a", "bigelow16", (1, 2, 3)),
                StimulusSet("b", "bigelow16", (40,))]
        path = tmp_path / "stimuli.json"
        save_stimulus_file(sets, path)
        loaded = load_stimulus_file(path)
        assert [(s.id, s.numbers) for s in loaded] == \
            [(s.id, s.numbers) for s in sets]

    def test_mixed_sources_rejected(self, tmp_path):
        sets = [StimulusSet("a", "bigelow16", (1,)),
                StimulusSet("b", "tenenbaum99", (2,))]
        with pytest.raises(InputError):
            save_stimulus_file(sets, tmp_path / "bad.json")

    def test_duplicate_numbers_rejected(self):
        with pytest.raises(InputError):
            StimulusSet("a", "bigelow16", (1, 1))

    def test_bigelow16_shaped_expansion(self, tmp_path):
        # synthetic file with the published shape: 255 sets, 636 presentations
        sets = []
        sizes = [1] * 55 + [2] * 20 + [3] * 179 + [6]
        for i, size in enumerate(sizes):
            numbers = tuple(((i * 7 + j * 11) % 100) + 1 for j in range(size))
            numbers = tuple(dict.fromkeys(numbers))
            while len(numbers) < size:
                numbers = numbers + ((numbers[-1] % 100) + 1,)
            sets.append(StimulusSet(f"b16-{i:03d}", "bigelow16", numbers[:size]))
        assert len(sets) == 255
        assert sum(min(len(s.numbers), 4) for s in sets) == 636
        assert len(expand_prefixes(sets)) == 636
