"""Corpus JSONL parsing, validation messages, and the split rule."""

import json

import pytest

from wordimportance.corpus import (
    LabeledUtterance,
    load_corpus,
    resolve_audio_path,
    save_corpus,
    split_corpus,
)
from wordimportance.errors import ConfigError, CorpusError, DataError
from wordimportance.features import WordTiming


def _utt(i, n_words=3, speaker="s0"):
    words = []
    scores = []
    t = 0.1
    for k in range(n_words):
        words.append(WordTiming(token=f"w{k}", start=t, end=t + 0.2))
        scores.append([0.1, 0.4, 0.8][k % 3])
        t += 0.3
    return LabeledUtterance(
        utterance_id=f"u{i:03d}",
        speaker_id=speaker,
        audio_path=f"wav/u{i:03d}.wav",
        words=words,
        scores=scores,
    )


def _write(tmp_path, utts):
    path = tmp_path / "corpus.jsonl"
    save_corpus(utts, path)
    return path


def test_round_trip_two_utterances(tmp_path):
    path = _write(tmp_path, [_utt(0), _utt(1)])
    back = load_corpus(path)
    assert len(back) == 2
    assert back[0].utterance_id == "u000"
    assert back[1].words[2].token == "w2"
    assert back[0].scores == [0.1, 0.4, 0.8]


def test_score_out_of_range_names_line(tmp_path):
    path = _write(tmp_path, [_utt(0), _utt(1)])
    lines = path.read_text().splitlines()
    doc = json.loads(lines[1])
    doc["words"][0]["score"] = 1.2
    lines[1] = json.dumps(doc)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorpusError) as err:
        load_corpus(path)
    assert "line 2" in str(err.value)


def test_overlapping_words_rejected(tmp_path):
    path = _write(tmp_path, [_utt(0)])
    doc = json.loads(path.read_text())
    doc["words"][1]["start_s"] = doc["words"][0]["end_s"] - 0.05
    path.write_text(json.dumps(doc) + "\n")
    with pytest.raises(CorpusError):
        load_corpus(path)


def test_reversed_word_interval_rejected(tmp_path):
    path = _write(tmp_path, [_utt(0)])
    doc = json.loads(path.read_text())
    doc["words"][0]["start_s"], doc["words"][0]["end_s"] = (
        doc["words"][0]["end_s"],
        doc["words"][0]["start_s"],
    )
    path.write_text(json.dumps(doc) + "\n")
    with pytest.raises(CorpusError):
        load_corpus(path)


def test_invalid_json_line_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"utterance_id": "u0"\n')
    with pytest.raises(CorpusError) as err:
        load_corpus(path)
    assert "line 1" in str(err.value)


def test_missing_field_rejected(tmp_path):
    path = tmp_path / "missing.jsonl"
    path.write_text(json.dumps({"utterance_id": "u0", "speaker_id": "s"}) + "\n")
    with pytest.raises(CorpusError):
        load_corpus(path)


def test_blank_lines_skipped(tmp_path):
    path = _write(tmp_path, [_utt(0)])
    path.write_text(path.read_text() + "\n\n")
    assert len(load_corpus(path)) == 1


def test_resolve_audio_path_relative_and_absolute(tmp_path):
    corpus_path = tmp_path / "c.jsonl"
    rel = resolve_audio_path(corpus_path, "wav/x.wav")
    assert rel == tmp_path / "wav" / "x.wav"
    absolute = tmp_path / "elsewhere.wav"
    assert resolve_audio_path(corpus_path, str(absolute)) == absolute


# ---------------------------------------------------------------- splits


def test_split_sizes_floor_remainder_to_train():
    utts = [_utt(i) for i in range(10)]
    train, dev, test = split_corpus(utts, (0.8, 0.1, 0.1), seed=0)
    assert (len(train), len(dev), len(test)) == (8, 1, 1)


def test_split_deterministic():
    utts = [_utt(i) for i in range(20)]
    a = split_corpus(utts, (0.8, 0.1, 0.1), seed=4)
    b = split_corpus(utts, (0.8, 0.1, 0.1), seed=4)
    for part_a, part_b in zip(a, b):
        assert [u.utterance_id for u in part_a] == [u.utterance_id for u in part_b]


def test_split_partitions_corpus():
    utts = [_utt(i) for i in range(23)]
    train, dev, test = split_corpus(utts, (0.8, 0.1, 0.1), seed=9)
    ids = [u.utterance_id for u in train + dev + test]
    assert sorted(ids) == sorted(u.utterance_id for u in utts)
    assert len(set(ids)) == len(ids)


def test_split_seed_changes_assignment():
    utts = [_utt(i) for i in range(30)]
    _, _, test_a = split_corpus(utts, (0.8, 0.1, 0.1), seed=1)
    _, _, test_b = split_corpus(utts, (0.8, 0.1, 0.1), seed=2)
    assert {u.utterance_id for u in test_a} != {u.utterance_id for u in test_b}


def test_split_rejects_bad_fractions():
    utts = [_utt(i) for i in range(10)]
    with pytest.raises(ConfigError):
        split_corpus(utts, (0.5, 0.2, 0.2), seed=0)


def test_split_needs_three_utterances():
    with pytest.raises(DataError):
        split_corpus([_utt(0), _utt(1)], (0.8, 0.1, 0.1), seed=0)
