"""Monte-Carlo block error rate harness for BPSK over AWGN.

Frames are seeded individually from (seed, frame index), so a run is
reproducible no matter how frames are distributed over workers, and two
decoders given the same seed see identical payloads and noise.
"""

import csv
import hashlib
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .codes import CrcConfig, PolarCode, assemble_u, construct, encode, load_sequence
from .listdec import ListConfig, ca_select, fscl_decode
from .lutdec import lut_fscl_decode, quantize_rx
from .lutdesign import LutSet, load_lutset
from .tree import build_tree, parse_kinds, sc_tree


@dataclass(frozen=True)
class ChannelModel:
    """BPSK over AWGN: bit 0 maps to +1, noise variance 1/(2 R 10^(EbN0/10))."""

    ebn0_db: float
    rate: float

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError("rate must be in (0, 1]")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))))


@dataclass(frozen=True)
class DecoderSpec:
    """Identity of one decoder configuration for simulation and reporting."""

    family: str = "llr"            # llr | ib | msib
    schedule: str = "fast"         # sc | fast
    metric_mode: str = "approx"    # exact | approx
    list_size: int = 8
    node_kinds: str = "r0,r1,rep,spc"
    lut_path: str = ""

    def __post_init__(self):
        if self.family not in ("llr", "ib", "msib"):
            raise ValueError(f"unknown decoder family {self.family!r}")
        if self.schedule not in ("sc", "fast"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.family != "llr" and not self.lut_path:
            raise ValueError("quantized decoders need a LUT file")


class FrameDecoder:
    """Decode one frame of channel outputs to a payload guess (CRC-aided pick)."""

    def __init__(self, code: PolarCode, spec: DecoderSpec, lutset: LutSet = None):
        self.code = code
        self.spec = spec
        if spec.schedule == "sc":
            self.tree = sc_tree(code)
        else:
            # an empty node list is a valid choice: it degenerates to the
            # unpruned schedule
            self.tree = build_tree(code, parse_kinds(spec.node_kinds))
        self.cfg = ListConfig(list_size=spec.list_size, metric_mode=spec.metric_mode)
        self.lutset = lutset
        if spec.family != "llr":
            if lutset is None:
                self.lutset = load_lutset(spec.lut_path)
            if self.lutset.variant != spec.family:
                raise ValueError(
                    f"LUT file holds a {self.lutset.variant} design, decoder is {spec.family}"
                )

    def __call__(self, y_real: np.ndarray, sigma: float) -> np.ndarray:
        if self.lutset is not None:
            symbols = quantize_rx(self.lutset.channel_thresholds, y_real)
            result = lut_fscl_decode(self.code, self.tree, symbols, self.lutset, self.cfg)
        else:
            llr = 2.0 * y_real / (sigma * sigma)
            result = fscl_decode(self.code, self.tree, llr, self.cfg)
        _, info, _ = ca_select(self.code, result)
        return info[: self.code.payload_len]


@dataclass
class SimPoint:
    ebn0_db: float
    frames: int
    block_errors: int
    bler: float
    elapsed_s: float


@dataclass
class SimResult:
    code_block_len: int
    code_payload_len: int
    code_crc_len: int
    decoder: DecoderSpec
    seed: int
    config_hash: str
    points: list = field(default_factory=list)
    lut_w: int = 0
    wall_time_s: float = 0.0


def run_frames(code: PolarCode, decoder, channel: ChannelModel, seed: int,
               frame_range) -> int:
    """Number of block errors over the given frame indices."""
    sigma = channel.sigma
    errors = 0
    for frame in frame_range:
        rng = np.random.default_rng((seed, int(frame)))
        payload = rng.integers(0, 2, code.payload_len, dtype=np.uint8)
        x = encode(code, assemble_u(code, payload))
        y = (1.0 - 2.0 * x.astype(np.float64)) + sigma * rng.standard_normal(code.block_len)
        if not np.array_equal(decoder(y, sigma), payload):
            errors += 1
    return errors


def _batch_job(args):
    code, decoder, channel, seed, start, stop = args
    return run_frames(code, decoder, channel, seed, range(start, stop))


def run_point(code: PolarCode, decoder, channel: ChannelModel, *,
              seed: int = 0, max_frames: int = 10000, min_errors: int = 100,
              batch_size: int = 256, workers: int = 1) -> SimPoint:
    """Simulate one Eb/N0 point until min_errors or max_frames (whole batches).

    The processed frame set depends only on the stop rule, never on worker
    count, so results are reproducible.
    """
    if max_frames < 1 or min_errors < 0:
        raise ValueError("invalid stop criteria")
    t0 = time.perf_counter()
    errors = 0
    frames_done = 0
    bounds = [(s, min(s + batch_size, max_frames)) for s in range(0, max_frames, batch_size)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_batch_job, (code, decoder, channel, seed, a, b))
                       for a, b in bounds]
            for (a, b), fut in zip(bounds, futures):
                errors += fut.result()
                frames_done = b
                if errors >= min_errors > 0:
                    for other in futures:
                        other.cancel()
                    break
    else:
        for a, b in bounds:
            errors += run_frames(code, decoder, channel, seed, range(a, b))
            frames_done = b
            if errors >= min_errors > 0:
                break
    elapsed = time.perf_counter() - t0
    return SimPoint(channel.ebn0_db, frames_done, errors, errors / frames_done, elapsed)


def sweep(code: PolarCode, spec: DecoderSpec, ebn0_list, *, seed: int = 0,
          max_frames: int = 10000, min_errors: int = 100, workers: int = 1,
          lutset: LutSet = None) -> SimResult:
    """run_point per Eb/N0; warns (does not fail) if BLER is non-monotone."""
    decoder = FrameDecoder(code, spec, lutset=lutset)
    result = SimResult(
        code_block_len=code.block_len,
        code_payload_len=code.payload_len,
        code_crc_len=code.crc_len,
        decoder=spec,
        seed=seed,
        config_hash=config_hash(code, spec, ebn0_list, seed, max_frames, min_errors),
        lut_w=decoder.lutset.w if decoder.lutset is not None else 0,
    )
    t0 = time.perf_counter()
    for ebn0 in ebn0_list:
        channel = ChannelModel(ebn0_db=float(ebn0), rate=code.rate)
        point = run_point(code, decoder, channel, seed=seed, max_frames=max_frames,
                          min_errors=min_errors, workers=workers)
        if result.points and point.bler > result.points[-1].bler:
            warnings.warn(
                f"BLER inversion at {ebn0} dB ({point.bler:.3g} > "
                f"{result.points[-1].bler:.3g}); likely statistical noise",
                stacklevel=2,
            )
        result.points.append(point)
    result.wall_time_s = time.perf_counter() - t0
    return result


def config_hash(code: PolarCode, spec: DecoderSpec, ebn0_list, seed, max_frames,
                min_errors) -> str:
    blob = json.dumps({
        "block_len": code.block_len,
        "payload_len": code.payload_len,
        "crc_len": code.crc_len,
        "decoder": asdict(spec),
        "ebn0": [float(e) for e in ebn0_list],
        "seed": seed,
        "max_frames": max_frames,
        "min_errors": min_errors,
    }, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


CSV_COLUMNS = ["ebn0_db", "frames", "errors", "bler", "decoder", "schedule",
               "variant", "metric", "w", "list", "seed"]


def write_csv(result: SimResult, path):
    spec = result.decoder
    variant = spec.family if spec.family != "llr" else "float"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for p in result.points:
            writer.writerow([
                repr(p.ebn0_db), p.frames, p.block_errors, repr(p.bler),
                spec.family, spec.schedule, variant, spec.metric_mode,
                result.lut_w, spec.list_size, result.seed,
            ])


def write_json(result: SimResult, path):
    doc = {
        "config_hash": result.config_hash,
        "code": {
            "block_len": result.code_block_len,
            "payload_len": result.code_payload_len,
            "crc_len": result.code_crc_len,
        },
        "decoder": asdict(result.decoder),
        "lut_w": result.lut_w,
        "seed": result.seed,
        "wall_time_s": result.wall_time_s,
        "points": [asdict(p) for p in result.points],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)


def code_from_options(block_len, payload_len, crc_len, rate_profile=None,
                      crc_poly=None) -> PolarCode:
    seq = load_sequence(rate_profile) if rate_profile else None
    crc_cfg = None
    if crc_poly is not None:
        crc_cfg = CrcConfig(width=crc_len, polynomial=int(str(crc_poly), 0))
    return construct(block_len, payload_len, crc_len, seq=seq, crc_cfg=crc_cfg)
