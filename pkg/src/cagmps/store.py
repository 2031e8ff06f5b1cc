"""Binary checkpoint container for chain states.

A checkpoint bundles a state with the operator frame it was optimized
in: the (possibly gate-rotated) Hamiltonian and the log of adopted
gates.  Everything is little endian.

Layout::

    magic      4 bytes   b"GMPS"
    version    u32       currently 1
    flags      u32       bit 0: Hamiltonian present, bit 1: gate log present
    n_sites    u32
    center     u32
    site records, one per site:
        rank   u8
        legs   rank x (generators u8, conjugated u8)
        coeffs complex128 C order, prod(2**generators) entries
    if flags bit 0:
        n_terms u32
        terms   n_terms x (re f64, im f64, labels n_sites ASCII bytes)
    if flags bit 1:
        n_entries u32
        entries n_entries x (sweep u32, bond u32, gate_id u32,
                             entropy_before f64, entropy_after f64)

Writes are atomic (temp file in the target directory, then rename), so
a crash mid-save never corrupts an existing checkpoint.
"""

from __future__ import annotations

import dataclasses
import os
import struct
import tempfile

import numpy as np

from .dmrg import GateLogEntry
from .grassmann import GrassmannTensor, Leg
from .mps import GMPS
from .pauli import Hamiltonian, PauliString

MAGIC = b"GMPS"
VERSION = 1

_FLAG_HAM = 1
_FLAG_LOG = 2


class FormatError(ValueError):
    """Raised when a checkpoint file is malformed."""


@dataclasses.dataclass
class Checkpoint:
    state: GMPS
    hamiltonian: Hamiltonian | None
    gate_log: list[GateLogEntry]


def save_checkpoint(
    path,
    state: GMPS,
    hamiltonian: Hamiltonian | None = None,
    gate_log: list[GateLogEntry] | None = None,
) -> None:
    parts = [MAGIC]
    flags = (_FLAG_HAM if hamiltonian is not None else 0) | (
        _FLAG_LOG if gate_log is not None else 0
    )
    parts.append(struct.pack("<IIII", VERSION, flags, state.n_sites, state.center))
    for site in state.sites:
        parts.append(struct.pack("<B", site.rank))
        for leg in site.legs:
            parts.append(struct.pack("<BB", leg.generators, 1 if leg.conjugated else 0))
        parts.append(np.ascontiguousarray(site.coeffs, dtype="<c16").tobytes())
    if hamiltonian is not None:
        if hamiltonian.n_sites != state.n_sites:
            raise ValueError("operator length does not match the state")
        parts.append(struct.pack("<I", len(hamiltonian.terms)))
        for term in hamiltonian.terms:
            parts.append(struct.pack("<dd", term.coeff.real, term.coeff.imag))
            parts.append(term.labels.encode("ascii"))
    if gate_log is not None:
        parts.append(struct.pack("<I", len(gate_log)))
        for e in gate_log:
            parts.append(
                struct.pack(
                    "<IIIdd", e.sweep, e.bond, e.gate_id, e.entropy_before, e.entropy_after
                )
            )
    blob = b"".join(parts)

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ckpt-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError("checkpoint truncated")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        rd = _Reader(fh.read())
    if rd.take(4) != MAGIC:
        raise FormatError("not a checkpoint file (bad magic)")
    version, flags, n_sites, center = rd.unpack("<IIII")
    if version != VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")

    sites = []
    for _ in range(n_sites):
        (rank,) = rd.unpack("<B")
        legs = []
        size = 1
        for _ in range(rank):
            gens, conj = rd.unpack("<BB")
            legs.append(Leg(gens, bool(conj)))
            size *= 1 << gens
        raw = rd.take(16 * size)
        coeffs = np.frombuffer(raw, dtype="<c16").astype(np.complex128)
        coeffs = coeffs.reshape(tuple(leg.dimension for leg in legs))
        sites.append(GrassmannTensor(tuple(legs), coeffs, 0))
    state = GMPS(sites, center)

    hamiltonian = None
    if flags & _FLAG_HAM:
        (n_terms,) = rd.unpack("<I")
        terms = []
        for _ in range(n_terms):
            re, im = rd.unpack("<dd")
            labels = rd.take(n_sites).decode("ascii")
            terms.append(PauliString(complex(re, im), labels))
        hamiltonian = Hamiltonian(n_sites, terms)

    gate_log: list[GateLogEntry] = []
    if flags & _FLAG_LOG:
        (n_entries,) = rd.unpack("<I")
        for _ in range(n_entries):
            sweep, bond, gate_id, before, after = rd.unpack("<IIIdd")
            gate_log.append(GateLogEntry(sweep, bond, gate_id, before, after))

    if rd.pos != len(rd.buf):
        raise FormatError("trailing bytes after checkpoint payload")
    return Checkpoint(state, hamiltonian, gate_log)
