"""End-to-end orchestration of the two annotation frameworks.

``run_baseline`` ships every tile at full resolution, annotates with
the detector, then sends the lowest-confidence tiles to the human.
``run_streamlined`` first fits a resolution level and a human budget
to the bandwidth budget (``compute_budget``), ships everything at that
low resolution, and pulls only the tiles picked for human review back
up to full resolution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import channel as ch_mod
from . import codestream as cs_mod
from .annotate import AnnotationSet, human_annotate
from .channel import ChannelSpec, transmit
from .metrics import TimelineEvent, TimelineReport, recall
from .raster import GroundTruthBox, Image, TileGrid

ESTIMATE_MAX = "max"
ESTIMATE_MEAN = "mean"


@dataclass(frozen=True)
class BudgetPlan:
    """Output of the budget calculator.

    ``lr`` is None when even resolution level 1 exceeds the bandwidth
    budget — the run is infeasible and constraints must be relaxed.
    """

    lr: Optional[int]
    hr: int
    human_budget: int
    tile_count: int

    def __post_init__(self):
        if self.lr is not None and not 1 <= self.lr <= self.hr:
            raise ValueError(f"lr {self.lr} outside 1..{self.hr}")
        if self.human_budget < 0:
            raise ValueError("human budget must be >= 0")


@dataclass(frozen=True)
class RunResult:
    """One framework run: merged annotations, plan, and timings."""

    annotations: AnnotationSet
    plan: BudgetPlan
    timeline: TimelineReport
    feasible: bool


def plan_budget(
    sizes_by_resolution: Sequence[int],
    tile_hr_sizes: Sequence[int],
    bw_bytes: int,
    mu_t_hum: float,
    t_hum_cap: float,
    tile_count: int,
    estimate: str = ESTIMATE_MAX,
) -> BudgetPlan:
    """Pick the highest transmittable resolution and the human budget.

    Scans resolution levels from the top down; the first whose
    whole-image payload fits the budget becomes ``lr``, and the leftover
    bytes fund full-resolution tiles for the human at the per-tile cost
    given by ``estimate`` ("max" never overshoots the budget; "mean"
    reads the per-tile size as a constant average instead). The budget
    is further capped by the annotator time cap and the tile count.
    """
    hr = len(sizes_by_resolution)
    if hr < 1:
        raise ValueError("need at least one resolution level")
    if estimate not in (ESTIMATE_MAX, ESTIMATE_MEAN):
        raise ValueError(f"unknown tile size estimate {estimate!r}")
    lr = None
    for r in range(hr, 0, -1):
        if sizes_by_resolution[r - 1] <= bw_bytes:
            lr = r
            break
    if lr is None:
        return BudgetPlan(lr=None, hr=hr, human_budget=0, tile_count=tile_count)
    slack = bw_bytes - sizes_by_resolution[lr - 1]
    if estimate == ESTIMATE_MAX:
        per_tile = max(tile_hr_sizes)
        by_bandwidth = slack // per_tile if per_tile > 0 else tile_count
    else:
        total = sum(tile_hr_sizes)
        by_bandwidth = slack * len(tile_hr_sizes) // total if total > 0 else tile_count
    budget = min(by_bandwidth, tile_count)
    if mu_t_hum > 0:
        budget = min(budget, int(t_hum_cap / mu_t_hum))
    return BudgetPlan(lr=lr, hr=hr, human_budget=int(budget), tile_count=tile_count)


def compute_budget(
    cs: cs_mod.Codestream,
    ch: ChannelSpec,
    mu_t_hum: float,
    t_hum_cap: float,
    rlvls: Sequence[int] | None = None,
    estimate: str = ESTIMATE_MAX,
) -> BudgetPlan:
    """Budget plan for a full codestream over a channel."""
    if rlvls is not None and list(rlvls) != list(range(1, cs.levels + 1)):
        raise ValueError("rlvls must be the contiguous set 1..levels")
    indices = [e.index for e in cs.entries]
    if len(indices) != cs.grid.tile_count or cs.max_resolution != cs.levels:
        raise ValueError("compute_budget requires a full codestream")
    sizes = [cs_mod.size_of(cs, indices, r) for r in range(1, cs.levels + 1)]
    tile_sizes = [cs_mod.size_of(cs, [i], cs.levels) for i in indices]
    return plan_budget(
        sizes,
        tile_sizes,
        ch_mod.bandwidth_budget(ch),
        mu_t_hum,
        t_hum_cap,
        len(indices),
        estimate,
    )


def select_tiles_for_human(
    anns: AnnotationSet, budget: int, grid: TileGrid
) -> list[int]:
    """Tiles owning the lowest-confidence detections, up to ``budget``.

    Boxes are ranked by ascending confidence (ties: lower tile index,
    then earlier box); walking that ranking, each new tile is collected
    until the budget is filled or the boxes run out. Tiles with no
    detections are never selected.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    order = sorted(
        range(len(anns.boxes)),
        key=lambda i: (anns.boxes[i].confidence, anns.boxes[i].tile_index, i),
    )
    chosen: list[int] = []
    seen = set()
    for i in order:
        if len(chosen) >= budget:
            break
        t = anns.boxes[i].tile_index
        if t not in seen:
            seen.add(t)
            chosen.append(t)
    return chosen


def _human_timeline(
    dl_anns: AnnotationSet,
    selected: Sequence[int],
    gt: Sequence[GroundTruthBox],
    grid: TileGrid,
    dl_time: float,
    t_tr: float,
    mu_t_hum: float,
    iou_threshold: float,
):
    """DL event plus one recall sample per human-annotated tile.

    The DL sample lands when the detector's input has arrived
    (``dl_time``); human samples step from the end of all transfers.
    """
    events = [TimelineEvent(dl_time, recall(dl_anns, gt, iou_threshold), "DL")]
    merged = dl_anns
    for k, _ in enumerate(selected, start=1):
        merged = dl_anns.merged_with(human_annotate(selected[:k], gt, grid))
        events.append(
            TimelineEvent(t_tr + mu_t_hum * k, recall(merged, gt, iou_threshold), f"HUM-tile-{k}")
        )
    return events, merged


def run_baseline(
    img: Image,
    grid: TileGrid,
    levels: int,
    ch: ChannelSpec,
    mu_t_hum: float,
    human_budget: int,
    detector,
    gt: Sequence[GroundTruthBox],
    seed: int,
    *,
    codestream: cs_mod.Codestream | None = None,
    compute_delay: float = 0.0,
    iou_threshold: float = 0.1,
) -> RunResult:
    """Conventional flow: send everything at full resolution, then refine.

    The human budget is an input here; the framework does not adapt to
    the channel, which is exactly its weakness.
    """
    cs = codestream if codestream is not None else cs_mod.encode(img, grid, levels)
    all_tiles = list(range(grid.tile_count))
    tr = transmit(cs_mod.size_of(cs, all_tiles, levels), ch, ch_mod.LABEL_HR_ALL)
    cs_mod.decode(cs, all_tiles, levels)
    dl_anns = detector.detect(all_tiles, gt, levels, seed)
    selected = select_tiles_for_human(dl_anns, human_budget, grid)
    if selected:
        # ground-station side: extraction costs no transmission
        sub = cs_mod.extract(cs, selected, levels)
        cs_mod.decode(sub, selected, levels)
    t_tr = tr.seconds + compute_delay
    events, merged = _human_timeline(
        dl_anns, selected, gt, grid, t_tr, t_tr, mu_t_hum, iou_threshold
    )
    timeline = TimelineReport(
        events=tuple(events), t_tr=t_tr, t_hum=mu_t_hum * len(selected)
    )
    plan = BudgetPlan(
        lr=levels, hr=levels, human_budget=human_budget, tile_count=grid.tile_count
    )
    return RunResult(annotations=merged, plan=plan, timeline=timeline, feasible=True)


def run_streamlined(
    img: Image,
    grid: TileGrid,
    levels: int,
    ch: ChannelSpec,
    mu_t_hum: float,
    t_hum_cap: float,
    detector,
    gt: Sequence[GroundTruthBox],
    seed: int,
    *,
    codestream: cs_mod.Codestream | None = None,
    compute_delay: float = 0.0,
    iou_threshold: float = 0.1,
    tile_size_estimate: str = ESTIMATE_MAX,
) -> RunResult:
    """Bandwidth-adaptive flow: low resolution first, detail on demand.

    When the budget cannot carry even the lowest resolution the run is
    infeasible: no transmissions, empty annotations, recall 0. When the
    chosen level is already full resolution the high-resolution
    re-transfer is skipped (the ground station holds those tiles), so
    the flow degenerates to the baseline plus a free index exchange.
    """
    cs = codestream if codestream is not None else cs_mod.encode(img, grid, levels)
    plan = compute_budget(
        cs, ch, mu_t_hum, t_hum_cap, estimate=tile_size_estimate
    )
    if plan.lr is None:
        timeline = TimelineReport(events=(), t_tr=0.0, t_hum=0.0)
        return RunResult(
            annotations=AnnotationSet(),
            plan=plan,
            timeline=timeline,
            feasible=False,
        )
    all_tiles = list(range(grid.tile_count))
    lr_stream = cs_mod.extract(cs, all_tiles, plan.lr)  # on the UAV
    tr_lr = transmit(len(lr_stream.payload), ch, ch_mod.LABEL_LR_ALL)
    cs_mod.decode(lr_stream, all_tiles, plan.lr)
    dl_anns = detector.detect(all_tiles, gt, plan.lr, seed)
    selected = select_tiles_for_human(dl_anns, plan.human_budget, grid)
    tr_idx = transmit(ch_mod.INDEX_BYTES * len(selected), ch, ch_mod.LABEL_INDICES)
    if selected and plan.lr < levels:
        hr_stream = cs_mod.extract(cs, selected, levels)  # on the UAV
        tr_hr = transmit(len(hr_stream.payload), ch, ch_mod.LABEL_HR_SELECTED)
        cs_mod.decode(hr_stream, selected, levels)
    else:
        tr_hr = transmit(0, ch, ch_mod.LABEL_HR_SELECTED)
    dl_time = compute_delay + tr_lr.seconds
    t_tr = dl_time + tr_idx.seconds + tr_hr.seconds
    events, merged = _human_timeline(
        dl_anns, selected, gt, grid, dl_time, t_tr, mu_t_hum, iou_threshold
    )
    timeline = TimelineReport(
        events=tuple(events), t_tr=t_tr, t_hum=mu_t_hum * len(selected)
    )
    return RunResult(annotations=merged, plan=plan, timeline=timeline, feasible=True)
