"""Sub-word windowing, per-word features, speaker z-norm, ablation masks."""

import numpy as np
import pytest

from wordimportance.audio import AudioBuffer
from wordimportance.dsp import compute_frame_track
from wordimportance.errors import ConfigError
from wordimportance.features import (
    ABLATION_GROUPS,
    N_LEXICAL,
    N_LEXICAL_RAW,
    N_WINDOW,
    N_WINDOW_RAW,
    WordTiming,
    assemble_utterance,
    extract_raw_utterance,
    fit_speaker_stats,
    full_mask,
    lexical_features,
    mask_without,
    subword_features,
    subword_windows,
    znorm_augment,
)

RATE = 16000


def _tone_buffer(freq=440.0, dur=1.0, amp=0.6):
    t = np.arange(int(dur * RATE)) / RATE
    return AudioBuffer(samples=amp * np.sin(2 * np.pi * freq * t), sample_rate=RATE)


# ---------------------------------------------------------------- windows


def test_window_count_200ms_word():
    spans = subword_windows(WordTiming("w", 0.0, 0.200), tau=0.050, hop=0.040)
    assert len(spans) == 4
    starts = [round(s, 6) for s, _ in spans]
    assert starts == [0.0, 0.040, 0.080, 0.120]
    for s, e in spans:
        assert e - s == pytest.approx(0.050)


def test_window_short_word_single_span():
    spans = subword_windows(WordTiming("w", 0.0, 0.030), tau=0.050, hop=0.040)
    assert spans == [(0.0, pytest.approx(0.030))]


def test_window_exact_tau_fit():
    spans = subword_windows(WordTiming("w", 0.0, 0.050), tau=0.050, hop=0.040)
    assert len(spans) == 1
    assert spans[0] == (0.0, pytest.approx(0.050))


def test_windows_stay_inside_word():
    for dur in (0.05, 0.08, 0.13, 0.201, 0.333):
        word = WordTiming("w", 1.0, 1.0 + dur)
        for s, e in subword_windows(word):
            assert s >= word.start - 1e-12
            assert e <= word.end + 1e-12


# ---------------------------------------------------------------- window features


def test_window_vector_dim_and_tone_stats():
    buf = _tone_buffer(440.0)
    track = compute_frame_track(buf)
    vec = subword_features(track, (0.2, 0.6))
    assert vec.shape == (N_WINDOW_RAW,)
    # pitch mean sits in slot 4 of the pitch stats block
    assert abs(vec[4] - 440.0) < 2.0
    assert vec[23] == 1.0  # fully voiced


def test_window_over_silence_is_zero_vector():
    buf = AudioBuffer(samples=np.zeros(RATE), sample_rate=RATE)
    track = compute_frame_track(buf)
    vec = subword_features(track, (0.1, 0.4))
    assert vec.shape == (N_WINDOW_RAW,)
    assert np.all(vec == 0.0)


def test_window_constant_pitch_flat_contour():
    buf = _tone_buffer(200.0)
    track = compute_frame_track(buf)
    vec = subword_features(track, (0.3, 0.7))
    # pitch range (slot 6) and slope (slot 7) vanish for a steady tone
    assert abs(vec[6]) < 1.0
    assert abs(vec[7]) < 20.0


# ---------------------------------------------------------------- lexical


def test_lexical_worked_example():
    words = [
        WordTiming("a", 0.5, 0.8),
        WordTiming("b", 1.0, 1.5),
        WordTiming("c", 1.7, 2.0),
    ]
    vec = lexical_features(1, words, syllables=2)
    assert vec.shape == (N_LEXICAL_RAW,)
    assert vec[0] == pytest.approx(0.5)  # duration
    assert vec[1] == pytest.approx(0.5)  # position 1 of (3-1)
    assert vec[2] == pytest.approx(0.2)  # silence since previous word
    assert vec[3] == 2.0  # syllables
    assert vec[4] == pytest.approx(0.25)  # mean syllable duration
    assert vec[5] == pytest.approx(4.0)  # syllables per second


def test_lexical_first_word_no_leading_silence():
    words = [WordTiming("a", 0.0, 0.3), WordTiming("b", 0.4, 0.6)]
    vec = lexical_features(0, words, syllables=1)
    assert vec[2] == 0.0


def test_lexical_zero_syllables_guarded():
    words = [WordTiming("a", 0.0, 0.4)]
    vec = lexical_features(0, words, syllables=0)
    assert vec[4] == pytest.approx(0.4)  # whole word counts as one span
    assert vec[5] == 0.0  # no syllables, no rate


# ---------------------------------------------------------------- speaker stats


def _fake_raw(speaker, window_rows, lex_rows):
    """Minimal RawUtteranceFeatures stand-in via the real extractor types."""
    from wordimportance.features import RawUtteranceFeatures, RawWordFeatures

    words = []
    for wrow, lrow in zip(window_rows, lex_rows):
        words.append(
            RawWordFeatures(
                raw_windows=np.array([wrow]),
                window_spans=[(0.0, 0.05)],
                raw_lexical=np.array(lrow),
            )
        )
    return RawUtteranceFeatures(utterance_id="u", speaker_id=speaker, words=words)


def test_stats_single_speaker_population_moments():
    w1 = [1.0] * N_WINDOW_RAW
    w2 = [3.0] * N_WINDOW_RAW
    l1 = [1.0] * N_LEXICAL_RAW
    l2 = [3.0] * N_LEXICAL_RAW
    stats = fit_speaker_stats([_fake_raw("s1", [w1, w2], [l1, l2])])
    mean, std = stats.lookup("s1")
    assert np.allclose(mean, 2.0)
    assert np.allclose(std, 1.0)  # population: sqrt(((1)^2+(1)^2)/2)


def test_stats_constant_feature_zero_std():
    w = [5.0] * N_WINDOW_RAW
    lex = [2.0] * N_LEXICAL_RAW
    stats = fit_speaker_stats([_fake_raw("s1", [w, w], [lex, lex])])
    _, std = stats.lookup("s1")
    assert np.all(std == 0.0)
    out = znorm_augment(np.array(w), "s1", stats, kind="window")
    assert np.all(out[N_WINDOW_RAW:] == 0.0)  # zero-std features z-score to 0


def test_stats_partition_by_speaker():
    a = _fake_raw("sa", [[1.0] * N_WINDOW_RAW], [[1.0] * N_LEXICAL_RAW])
    b = _fake_raw("sb", [[9.0] * N_WINDOW_RAW], [[9.0] * N_LEXICAL_RAW])
    stats = fit_speaker_stats([a, b])
    mean_a, _ = stats.lookup("sa")
    mean_b, _ = stats.lookup("sb")
    assert np.allclose(mean_a, 1.0)
    assert np.allclose(mean_b, 9.0)


def test_znorm_identities():
    w1 = [1.0] * N_WINDOW_RAW
    w2 = [3.0] * N_WINDOW_RAW
    stats = fit_speaker_stats(
        [_fake_raw("s1", [w1, w2], [[1.0] * N_LEXICAL_RAW, [3.0] * N_LEXICAL_RAW])]
    )
    at_mean = znorm_augment(np.full(N_WINDOW_RAW, 2.0), "s1", stats, kind="window")
    assert at_mean.shape == (N_WINDOW,)
    assert np.allclose(at_mean[N_WINDOW_RAW:], 0.0)
    one_sigma = znorm_augment(np.full(N_WINDOW_RAW, 3.0), "s1", stats, kind="window")
    assert np.allclose(one_sigma[N_WINDOW_RAW:], 1.0)


def test_znorm_unseen_speaker_uses_global():
    w1 = [1.0] * N_WINDOW_RAW
    w2 = [3.0] * N_WINDOW_RAW
    stats = fit_speaker_stats(
        [_fake_raw("s1", [w1, w2], [[1.0] * N_LEXICAL_RAW, [3.0] * N_LEXICAL_RAW])]
    )
    out = znorm_augment(np.full(N_WINDOW_RAW, 3.0), "never-seen", stats, kind="window")
    assert np.all(np.isfinite(out))
    assert np.allclose(out[N_WINDOW_RAW:], 1.0)  # global stats equal s1's here


# ---------------------------------------------------------------- assembly


def _three_word_utterance():
    rng = np.random.default_rng(5)
    t = np.arange(2 * RATE) / RATE
    sig = 0.5 * np.sin(2 * np.pi * 180 * t)
    sig[: int(0.2 * RATE)] = 0.0
    sig[int(1.8 * RATE) :] = 0.0
    buf = AudioBuffer(samples=sig, sample_rate=RATE)
    words = [
        WordTiming("aa", 0.25, 0.45),
        WordTiming("bb", 0.60, 0.90),
        WordTiming("cc", 1.10, 1.25),
    ]
    return buf, words


def test_extract_three_words_three_bundles():
    buf, words = _three_word_utterance()
    raw = extract_raw_utterance(buf, words, "u1", "s1")
    assert len(raw.words) == 3
    for w, word in zip(raw.words, words):
        assert w.raw_windows.shape[1] == N_WINDOW_RAW
        assert len(w.window_spans) == len(subword_windows(word))


def test_extract_empty_word_list():
    buf, _ = _three_word_utterance()
    raw = extract_raw_utterance(buf, [], "u1", "s1")
    assert raw.words == []


def test_assemble_dims_after_znorm():
    buf, words = _three_word_utterance()
    raw = extract_raw_utterance(buf, words, "u1", "s1")
    stats = fit_speaker_stats([raw])
    bundles = assemble_utterance(buf, words, "s1", stats)
    assert len(bundles) == 3
    for seq, lex in bundles:
        assert seq.windows.shape[1] == N_WINDOW  # 24 raw + 24 z-normed
        assert lex.vector.shape == (N_LEXICAL,)  # 6 raw + 6 z-normed


def test_assemble_deterministic():
    buf, words = _three_word_utterance()
    raw = extract_raw_utterance(buf, words, "u1", "s1")
    stats = fit_speaker_stats([raw])
    a = assemble_utterance(buf, words, "s1", stats)
    b = assemble_utterance(buf, words, "s1", stats)
    for (sa, la), (sb, lb) in zip(a, b):
        assert np.array_equal(sa.windows, sb.windows)
        assert np.array_equal(la.vector, lb.vector)


# ---------------------------------------------------------------- masks


def test_full_mask_dims():
    m = full_mask()
    assert m.n_window == 48
    assert m.n_lexical == 12
    assert m.n_window + m.n_lexical == 60


def test_mask_dimension_accounting():
    # removing a group drops its raw slots and their z-normed twins
    expect_window = {"FREQ": 48 - 20, "ENG": 48 - 22, "VOC": 48 - 6, "LEX": 48, "ZNORM": 24}
    expect_lexical = {"FREQ": 12, "ENG": 12, "VOC": 12, "LEX": 0, "ZNORM": 6}
    for group in ABLATION_GROUPS:
        m = mask_without(group)
        assert m.n_window == expect_window[group], group
        assert m.n_lexical == expect_lexical[group], group


def test_mask_without_none_is_full():
    assert mask_without(None) == full_mask()


def test_mask_unknown_group_rejected():
    with pytest.raises(ConfigError):
        mask_without("PITCH")


def test_masked_features_drop_columns():
    buf, words = _three_word_utterance()
    raw = extract_raw_utterance(buf, words, "u1", "s1")
    stats = fit_speaker_stats([raw])
    bundles = assemble_utterance(buf, words, "s1", stats)
    m = mask_without("ZNORM")
    seq, lex = bundles[0]
    win = m.apply_windows(seq.windows)
    assert win.shape[1] == 24
    assert m.apply_lexical(lex.vector).shape == (6,)
    # surviving columns are the raw block, bit for bit
    assert np.array_equal(win, seq.windows[:, :24])
