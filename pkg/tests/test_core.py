"""Core type invariants and persistence round-trips."""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from vireo.core import (
    BBox,
    BarOrder,
    ChoiceLetter,
    DatasetError,
    Difficulty,
    DigitSequence,
    Dimension,
    ElimItem,
    EliminationOrder,
    ExprResult,
    Frame,
    MazeTruth,
    ObjectRef,
    ObjectSet,
    PixelTarget,
    QAItem,
    QASet,
    SudokuGrid,
    TargetRegion,
    Task,
    TaskSample,
    Verdict,
    VideoClip,
    derive_seed,
    frame_from_png_bytes,
    frame_to_png_bytes,
    load_clip,
    load_dataset,
    read_verdicts,
    save_clip,
    save_dataset,
    truth_from_json,
    truth_to_json,
    write_verdicts,
)


def _frame(w=8, h=6, value=127) -> Frame:
    return Frame(np.full((h, w, 3), value, dtype=np.uint8))


def _rand_frame(seed=0, w=16, h=12) -> Frame:
    rng = np.random.default_rng(seed)
    return Frame(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


class TestFrame:
    def test_dimensions_and_immutability(self):
        f = _frame(10, 4)
        assert f.width == 10 and f.height == 4
        with pytest.raises(ValueError):
            f.pixels[0, 0] = 0

    def test_rejects_bad_dtype_and_shape(self):
        with pytest.raises(ValueError):
            Frame(np.zeros((4, 4, 3), dtype=np.float32))
        with pytest.raises(ValueError):
            Frame(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            Frame(np.zeros((0, 4, 3), dtype=np.uint8))

    def test_equality_is_pixel_exact(self):
        a = _rand_frame(1)
        b = Frame(a.pixels.copy())
        assert a == b
        arr = a.pixels.copy()
        arr[0, 0, 0] ^= 1
        assert a != Frame(arr)

    def test_digest_stable_and_distinct(self):
        a, b = _rand_frame(2), _rand_frame(3)
        assert a.digest() == Frame(a.pixels.copy()).digest()
        assert a.digest() != b.digest()

    def test_png_round_trip_lossless(self):
        f = _rand_frame(4, w=33, h=21)
        assert frame_from_png_bytes(frame_to_png_bytes(f)) == f


class TestVideoClip:
    def test_needs_uniform_frames(self):
        with pytest.raises(ValueError):
            VideoClip(frames=(_frame(8, 8), _frame(9, 8)))
        with pytest.raises(ValueError):
            VideoClip(frames=())

    def test_clip_io_round_trip(self, tmp_path):
        clip = VideoClip(frames=tuple(_rand_frame(i) for i in range(4)), fps=8.0)
        save_clip(clip, tmp_path / "clip")
        again = load_clip(tmp_path / "clip")
        assert again == clip


class TestGroundTruthSerialization:
    @pytest.mark.parametrize(
        "truth",
        [
            SudokuGrid(
                solution=((1, 2, 3, 4), (3, 4, 1, 2), (2, 1, 4, 3), (4, 3, 2, 1)),
                givens=((1, 0, 3, 4), (3, 4, 0, 2), (0, 1, 4, 3), (4, 3, 2, 0)),
            ),
            ExprResult(text="3+4", value=Fraction(7)),
            ExprResult(text="1/3", value=Fraction(1, 3)),
            ChoiceLetter(letter="C"),
            DigitSequence(digits=(2, 4, 6, 8, 1, 0)),
            BarOrder(ranks=(0, 1, 2, 3), count=4),
            TargetRegion(bbox=BBox(4, 5, 10, 12), embedding=(0.5, 0.25, 0.1)),
            ObjectSet(
                objects=(
                    ObjectRef("red ball", BBox(1, 2, 3, 4)),
                    ObjectRef("blue ball", BBox(9, 9, 3, 4)),
                )
            ),
            MazeTruth(
                grid=((False,) * 5, (False, True, True, True, False),
                      (False, False, False, True, False),
                      (False, True, True, True, False), (False,) * 5),
                start=(1, 1),
                goal=(3, 1),
                origin=(10, 10),
                cell_px=20,
            ),
            EliminationOrder(
                items=(ElimItem("red circle", "red"), ElimItem("blue circle", "blue"))
            ),
            QASet(items=(QAItem("Did it move?", True), QAItem("Is it red?", False))),
            PixelTarget(frame=_rand_frame(5, w=6, h=6)),
        ],
        ids=lambda t: t.kind,
    )
    def test_round_trip(self, truth):
        data = truth_to_json(truth)
        # must survive a real JSON encode/decode cycle
        again = truth_from_json(json.loads(json.dumps(data)))
        assert again == truth
        assert data["kind"] == truth.kind

    def test_unknown_kind_rejected(self):
        with pytest.raises(DatasetError):
            truth_from_json({"kind": "nope"})

    def test_sudoku_validates_shapes(self):
        with pytest.raises(ValueError):
            SudokuGrid(solution=((1, 2), (2, 1)), givens=((1,), (2,)))
        with pytest.raises(ValueError):
            SudokuGrid(solution=((5, 2), (2, 1)), givens=((0, 0), (0, 0)))

    def test_qa_set_size_bounds(self):
        with pytest.raises(ValueError):
            QASet(items=(QAItem("q", True),))

    def test_bar_order_must_be_permutation(self):
        with pytest.raises(ValueError):
            BarOrder(ranks=(0, 0, 1), count=3)


def _sample(sample_id="s1", seed=7) -> TaskSample:
    return TaskSample(
        id=sample_id,
        dimension=Dimension.SYMBOLIC_LOGICAL,
        task=Task.ARITHMETIC_OPERATIONS,
        difficulty=Difficulty.EASY,
        initial=_rand_frame(10),
        target=_rand_frame(11),
        prompt="The missing answer fades in after the equals sign.",
        truth=ExprResult(text="3+4", value=Fraction(7)),
        seed=seed,
    )


class TestTaskSample:
    def test_valid_sample(self):
        s = _sample()
        assert s.meta.task is Task.ARITHMETIC_OPERATIONS

    def test_dimension_must_match_task(self):
        with pytest.raises(ValueError):
            TaskSample(
                id="x",
                dimension=Dimension.STRUCTURAL,
                task=Task.ARITHMETIC_OPERATIONS,
                difficulty=Difficulty.EASY,
                initial=_rand_frame(0),
                target=_rand_frame(1),
                prompt="p",
                truth=ExprResult(text="1", value=Fraction(1)),
                seed=0,
            )

    def test_truth_kind_must_match_task(self):
        with pytest.raises(ValueError):
            TaskSample(
                id="x",
                dimension=Dimension.SYMBOLIC_LOGICAL,
                task=Task.ARITHMETIC_OPERATIONS,
                difficulty=Difficulty.EASY,
                initial=_rand_frame(0),
                target=_rand_frame(1),
                prompt="p",
                truth=ChoiceLetter(letter="A"),
                seed=0,
            )

    def test_empty_prompt_rejected(self):
        with pytest.raises(ValueError):
            TaskSample(
                id="x",
                dimension=Dimension.SYMBOLIC_LOGICAL,
                task=Task.ARITHMETIC_OPERATIONS,
                difficulty=Difficulty.EASY,
                initial=_rand_frame(0),
                target=_rand_frame(1),
                prompt="   ",
                truth=ExprResult(text="1", value=Fraction(1)),
                seed=0,
            )


class TestVerdicts:
    def test_error_verdict_cannot_pass(self):
        with pytest.raises(ValueError):
            Verdict(
                sample_id="s",
                generation_index=0,
                passed=True,
                metric="arithmetic",
                error="judge unreachable",
            )

    def test_jsonl_round_trip_and_stable_bytes(self, tmp_path):
        verdicts = [
            Verdict("s1", 0, True, "arithmetic", {"read": "7"}),
            Verdict("s1", 1, False, "arithmetic", {"read": "8"}),
            Verdict("s2", 0, False, "sudoku", {}, error="grid not found"),
        ]
        p1 = tmp_path / "a.jsonl"
        p2 = tmp_path / "b.jsonl"
        write_verdicts(verdicts, p1)
        write_verdicts(verdicts, p2)
        assert p1.read_bytes() == p2.read_bytes()
        again = read_verdicts(p1)
        assert again == verdicts
        # field order on disk is stable: sample_id first, then generation_index
        first = p1.read_text().splitlines()[0]
        assert first.index("sample_id") < first.index("generation_index") < first.index("pass")

    def test_read_rejects_garbage(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text('{"sample_id": "s"}\n')
        with pytest.raises(DatasetError):
            read_verdicts(p)


class TestDatasetRoundTrip:
    def test_save_then_load_identical(self, tmp_path):
        samples = [_sample("s1", 1), _sample("s2", 2)]
        clips = {
            s.id: VideoClip(frames=(s.initial,) * 3 + (s.target,), fps=8.0)
            for s in samples
        }
        root = tmp_path / "ds"
        save_dataset(root, samples, clips)
        ds = load_dataset(root)
        assert len(ds) == 2
        for orig, loaded in zip(samples, ds.samples):
            assert loaded.id == orig.id
            assert loaded.initial == orig.initial
            assert loaded.target == orig.target
            assert loaded.truth == orig.truth
            assert loaded.prompt == orig.prompt
            assert loaded.seed == orig.seed
        assert ds.gt_video("s1") == clips["s1"]

    def test_missing_frame_file_reports_sample(self, tmp_path):
        samples = [_sample("s1", 1)]
        clips = {"s1": VideoClip(frames=(samples[0].initial,) * 2, fps=8.0)}
        root = tmp_path / "ds"
        save_dataset(root, samples, clips)
        (root / "s1" / "target.png").unlink()
        with pytest.raises(DatasetError) as exc:
            load_dataset(root)
        assert "s1" in str(exc.value)

    def test_schema_version_mismatch(self, tmp_path):
        samples = [_sample("s1", 1)]
        clips = {"s1": VideoClip(frames=(samples[0].initial,) * 2, fps=8.0)}
        root = tmp_path / "ds"
        save_dataset(root, samples, clips)
        manifest = json.loads((root / "manifest.json").read_text())
        manifest["schema_version"] = 99
        (root / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(DatasetError):
            load_dataset(root)

    def test_missing_gt_frame_detected(self, tmp_path):
        samples = [_sample("s1", 1)]
        clips = {"s1": VideoClip(frames=(samples[0].initial,) * 3, fps=8.0)}
        root = tmp_path / "ds"
        save_dataset(root, samples, clips)
        (root / "s1" / "gt" / "frame_0002.png").unlink()
        with pytest.raises(DatasetError):
            load_dataset(root)


class TestDeriveSeed:
    def test_deterministic_and_label_sensitive(self):
        assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
        assert derive_seed(1, "a", 2) != derive_seed(1, "a", 3)
        assert derive_seed(1, "a") != derive_seed(2, "a")
        s = derive_seed(123, "x")
        assert 0 <= s < 2**64
