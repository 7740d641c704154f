"""R-peak detection, cycle cutting, resampling."""

import numpy as np
import pytest

from helpers import DEFAULT_GAIN, make_jittered_record
from ecgdyn.errors import NoRhythmError
from ecgdyn.integrate import beat_grid
from ecgdyn.leads import FREE_LEADS, LEAD_NAMES, synthesize_heartbeat
from ecgdyn.model import RhythmParams
from ecgdyn.params import default_eta_for_lead
from ecgdyn.segmentation import Record, detect_r_peaks, resample_cycle, segment_record


class TestResample:
    def test_identity_when_lengths_match(self):
        rng = np.random.default_rng(0)
        seg = rng.standard_normal(128)
        assert np.array_equal(resample_cycle(seg, 128), seg)

    def test_linear_ramp_exact(self):
        ramp = np.linspace(0.0, 1.0, 100)
        for target in (50, 100, 137, 512):
            out = resample_cycle(ramp, target)
            expect = np.linspace(0.0, 1.0, target)
            assert np.allclose(out, expect, rtol=0, atol=1e-14)
            assert out[0] == 0.0 and out[-1] == 1.0

    def test_sine_reconstruction(self):
        # 5 Hz sine sampled with 400 points over one second
        t_in = np.linspace(0.0, 1.0, 400)
        seg = np.sin(2 * np.pi * 5.0 * t_in)
        out = resample_cycle(seg, 512)
        t_out = np.linspace(0.0, 1.0, 512)
        assert np.max(np.abs(out - np.sin(2 * np.pi * 5.0 * t_out))) <= 1e-3

    def test_endpoints_preserved(self):
        rng = np.random.default_rng(1)
        seg = rng.standard_normal(73)
        out = resample_cycle(seg, 512)
        assert out[0] == seg[0] and out[-1] == seg[-1]

    def test_extrema_within_interpolation_error(self):
        rng = np.random.default_rng(2)
        seg = np.cumsum(rng.standard_normal(200)) * 0.05
        out = resample_cycle(seg, 311)
        slack = np.max(np.abs(np.diff(seg)))
        assert out.max() <= seg.max() + slack
        assert out.min() >= seg.min() - slack

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            resample_cycle(np.array([1.0]), 10)
        with pytest.raises(ValueError):
            resample_cycle(np.arange(10.0), 1)


class TestDetector:
    def test_synthetic_record_peaks(self):
        record, truth = make_jittered_record(seed=5)
        peaks = detect_r_peaks(record.channels[1], record.fs)
        assert len(peaks) == len(truth)
        assert all(abs(int(p) - t) <= 10 for p, t in zip(peaks, truth))

    def test_zero_signal_no_rhythm(self):
        with pytest.raises(NoRhythmError):
            detect_r_peaks(np.zeros(5000), 500.0)

    def test_offset_invariance(self):
        record, _ = make_jittered_record(seed=9)
        base = detect_r_peaks(record.channels[1], record.fs)
        shifted = detect_r_peaks(record.channels[1] + 0.1, record.fs)
        assert np.array_equal(base, shifted)

    def test_short_signal_rejected(self):
        with pytest.raises(ValueError):
            detect_r_peaks(np.zeros(100), 500.0)

    def test_strictly_increasing_with_refractory(self):
        record, _ = make_jittered_record(seed=12)
        peaks = detect_r_peaks(record.channels[1], record.fs)
        gaps = np.diff(peaks)
        assert np.all(gaps > 0)
        assert np.all(gaps >= 0.2 * record.fs)

    def test_peaks_are_local_raw_maxima(self):
        record, _ = make_jittered_record(seed=3)
        x = record.channels[1]
        half = int(round(0.05 * record.fs))
        for p in detect_r_peaks(x, record.fs):
            lo, hi = max(0, p - half), min(x.size, p + half + 1)
            assert x[p] == np.max(x[lo:hi])


class TestSegmentRecord:
    def test_ten_beats_give_nine_cycles(self):
        record, _ = make_jittered_record(seed=5)
        beats = segment_record(record, 512)
        assert len(beats) == 9
        assert all(b.grid.L == 512 for b in beats)
        assert all(b.leads.shape == (12, 512) for b in beats)

    def test_label_propagated(self):
        record, _ = make_jittered_record(seed=5, label="NORMAL")
        beats = segment_record(record, 512)
        assert all(b.label == "NORMAL" for b in beats)

    def test_rows_share_cut_window(self):
        record, _ = make_jittered_record(seed=7)
        peaks = detect_r_peaks(record.channels[1], record.fs)
        beats = segment_record(record, 512)
        k = 4
        start, end = int(peaks[k]), int(peaks[k + 1])
        for row, lead in enumerate(LEAD_NAMES):
            expect = resample_cycle(record.channels[row, start:end], 512)
            assert np.array_equal(beats[k].leads[row], expect)

    def test_cycle_matches_generating_beat(self):
        # two copies of one wander-free beat: the single extracted cycle is
        # the generating beat rolled to start at its R peak
        fs, f = 500, 1.0
        rhythm = RhythmParams(f=f, A=0.0, f2=0.25)
        grid = beat_grid(fs, f)
        params = {lead: default_eta_for_lead(lead) for lead in FREE_LEADS}
        gains = {lead: DEFAULT_GAIN for lead in FREE_LEADS}
        beat = synthesize_heartbeat(params, rhythm, grid, gains=gains)
        channels = np.hstack([beat.leads, beat.leads])
        record = Record(fs=float(fs), channels=channels, id="twin")
        cycles = segment_record(record, 512)
        assert len(cycles) == 1
        r_idx = int(np.argmax(beat.lead("II")))
        rolled = np.roll(beat.lead("II"), -r_idx)
        expect = resample_cycle(rolled, 512)
        r_amp = float(np.max(np.abs(beat.lead("II"))))
        assert np.max(np.abs(cycles[0].lead("II") - expect)) <= 0.02 * r_amp

    def test_record_validation(self):
        with pytest.raises(ValueError):
            Record(fs=500.0, channels=np.zeros((11, 600)), id="bad")
        with pytest.raises(ValueError):
            Record(fs=500.0, channels=np.zeros((12, 100)), id="short")
        with pytest.raises(ValueError):
            Record(fs=500.0, channels=np.zeros((12, 600)), id="x", label="bad-code")
