"""One server per database over real sockets; a client that retrieves
privately by querying all of them.

Wire protocol v1, bit-exact:

    frame    = length (4B big-endian, = payload size + 1) || type (1B) || payload
    0x10 HELLO          32-byte code content hash
    0x11 HELLO-ACK      empty
    0x12 HASH-MISMATCH  empty; connection is closed, no answers served
    0x20 QUERY          4B big-endian query index
    0x21 ANSWER         ceil(Lx/8) bytes, MSB-first bit packing
    0x7F ERROR          1B code: 0x01 query out of range, 0x02 malformed frame

Frames larger than 1 MiB are rejected as malformed. Servers are stateless
across queries; answers are a pure function of (code, messages, q), so two
servers with the same inputs emit byte-identical ANSWER frames.
"""

from __future__ import annotations

import socket
import socketserver
import struct
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import ceil, log2
from typing import Sequence

from . import pir
from .codespec import content_hash, to_document
from .gf2 import BitVector

FRAME_HELLO = 0x10
FRAME_HELLO_ACK = 0x11
FRAME_HASH_MISMATCH = 0x12
FRAME_QUERY = 0x20
FRAME_ANSWER = 0x21
FRAME_ERROR = 0x7F

ERR_QUERY_RANGE = 0x01
ERR_MALFORMED = 0x02

MAX_FRAME = 1 << 20


class ProtocolError(RuntimeError):
    pass


class RetrievalError(RuntimeError):
    pass


def send_frame(sock: socket.socket, frame_type: int, payload: bytes = b"") -> None:
    if len(payload) + 1 > MAX_FRAME:
        raise ProtocolError("frame too large")
    sock.sendall(struct.pack(">I", len(payload) + 1) + bytes([frame_type]) + payload)


def _recv_exact(sock: socket.socket, n: int) -> bytes | None:
    chunks = []
    got = 0
    while got < n:
        data = sock.recv(n - got)
        if not data:
            return None
        chunks.append(data)
        got += len(data)
    return b"".join(chunks)


def recv_frame(sock: socket.socket) -> tuple[int, bytes] | None:
    """Next frame, or None on orderly EOF. Raises ProtocolError on truncated
    or oversized frames."""
    header = _recv_exact(sock, 4)
    if header is None:
        return None
    (length,) = struct.unpack(">I", header)
    if length < 1 or length > MAX_FRAME:
        raise ProtocolError(f"invalid frame length {length}")
    body = _recv_exact(sock, length)
    if body is None:
        raise ProtocolError("connection closed mid-frame")
    return body[0], body[1:]


def scheme_hash(scheme: pir.PirScheme) -> bytes:
    """32-byte digest negotiated in HELLO; binds client and servers to the
    same code and database layout."""
    doc = to_document(scheme.code, databases=scheme.databases)
    return bytes.fromhex(content_hash(doc))


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    host, _, port = endpoint.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"endpoint must be host:port, got {endpoint!r}")
    return host, int(port)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        server: "_TCPServer" = self.server  # type: ignore[assignment]
        sock = self.request
        try:
            frame = recv_frame(sock)
            if frame is None:
                return
            ftype, payload = frame
            if ftype != FRAME_HELLO or len(payload) != 32:
                send_frame(sock, FRAME_ERROR, bytes([ERR_MALFORMED]))
                return
            if payload != server.expected_hash:
                send_frame(sock, FRAME_HASH_MISMATCH)
                return
            send_frame(sock, FRAME_HELLO_ACK)
            while True:
                frame = recv_frame(sock)
                if frame is None:
                    return
                ftype, payload = frame
                if ftype != FRAME_QUERY or len(payload) != 4:
                    send_frame(sock, FRAME_ERROR, bytes([ERR_MALFORMED]))
                    return
                (q,) = struct.unpack(">I", payload)
                if q >= len(server.answers):
                    send_frame(sock, FRAME_ERROR, bytes([ERR_QUERY_RANGE]))
                    continue
                send_frame(sock, FRAME_ANSWER, server.answers[q])
        except ProtocolError:
            try:
                send_frame(sock, FRAME_ERROR, bytes([ERR_MALFORMED]))
            except OSError:
                pass
        except OSError:
            pass


class _TCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, answers: list[bytes], expected_hash: bytes):
        self.answers = answers
        self.expected_hash = expected_hash
        super().__init__(address, _Handler)


class DatabaseServer:
    """A running database; context manager closing the socket on exit."""

    def __init__(self, scheme: pir.PirScheme, n: int, messages: BitVector, listen: str = "127.0.0.1:0"):
        if not 1 <= n <= scheme.n_databases:
            raise IndexError(f"database index must be in [1, {scheme.n_databases}]")
        # All answers precomputed: the store is immutable for the server's life.
        answers = [
            pir.answer(scheme, n, q, messages).to_bytes()
            for q in range(scheme.query_space(n))
        ]
        self.database = n
        self._server = _TCPServer(parse_endpoint(listen), answers, scheme_hash(scheme))
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def endpoint(self) -> str:
        host, port = self._server.server_address[:2]
        return f"{host}:{port}"

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "DatabaseServer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def serve_database(
    scheme: pir.PirScheme, n: int, messages: BitVector, listen: str = "127.0.0.1:0"
) -> DatabaseServer:
    """Start database n (1-based) of the scheme on a loopback endpoint."""
    return DatabaseServer(scheme, n, messages, listen)


@dataclass(frozen=True)
class WireRecord:
    database: int
    endpoint: str
    query: int
    query_space: int
    upload_bits_wire: int  # query information at wire bit granularity
    upload_bits_info: float  # exact log2 of the query space
    download_bits: int


@dataclass(frozen=True)
class RetrievalTranscript:
    theta: int
    set_index: int
    records: tuple[WireRecord, ...]

    @property
    def total_download_bits(self) -> int:
        return sum(r.download_bits for r in self.records)


def _fetch_answer(endpoint: str, expected_hash: bytes, q: int, answer_bytes: int) -> bytes:
    with socket.create_connection(parse_endpoint(endpoint), timeout=10) as sock:
        send_frame(sock, FRAME_HELLO, expected_hash)
        frame = recv_frame(sock)
        if frame is None or frame[0] != FRAME_HELLO_ACK:
            got = "EOF" if frame is None else f"frame 0x{frame[0]:02x}"
            raise ProtocolError(f"handshake rejected ({got})")
        send_frame(sock, FRAME_QUERY, struct.pack(">I", q))
        frame = recv_frame(sock)
        if frame is None:
            raise ProtocolError("connection closed before answer")
        ftype, payload = frame
        if ftype == FRAME_ERROR:
            raise ProtocolError(f"server error 0x{payload[0]:02x}" if payload else "server error")
        if ftype != FRAME_ANSWER or len(payload) != answer_bytes:
            raise ProtocolError(f"unexpected frame 0x{ftype:02x}")
        return payload


def retrieve(
    scheme: pir.PirScheme,
    theta: int,
    endpoints: Sequence[str],
    rng=None,
) -> tuple[BitVector, RetrievalTranscript]:
    """Privately retrieve W_theta from live servers, one query per database,
    issued concurrently. Raises RetrievalError naming the database on any
    failure; no partial-answer decode is attempted."""
    if len(endpoints) != scheme.n_databases:
        raise ValueError(f"expected {scheme.n_databases} endpoints")
    bundle = pir.gen_query(scheme, theta, rng)
    expected = scheme_hash(scheme)
    lx = scheme.code.params.Lx
    answer_bytes = ceil(lx / 8)

    def fetch(n: int) -> bytes:
        return _fetch_answer(endpoints[n - 1], expected, bundle.queries[n - 1], answer_bytes)

    ns = list(range(1, scheme.n_databases + 1))
    with ThreadPoolExecutor(max_workers=scheme.n_databases) as pool:
        futures = {n: pool.submit(fetch, n) for n in ns}
        raw: dict[int, bytes] = {}
        failure: tuple[int, Exception] | None = None
        for n in ns:
            try:
                raw[n] = futures[n].result()
            except Exception as exc:  # noqa: BLE001 - reported with database id
                if failure is None:
                    failure = (n, exc)
    if failure is not None:
        n, exc = failure
        raise RetrievalError(f"database {n} at {endpoints[n - 1]}: {exc}") from exc

    answers = [BitVector.from_bytes(raw[n], lx) for n in ns]
    value = pir.reconstruct(scheme, bundle, answers)
    records = tuple(
        WireRecord(
            database=n,
            endpoint=endpoints[n - 1],
            query=bundle.queries[n - 1],
            query_space=scheme.query_space(n),
            upload_bits_wire=ceil(log2(scheme.query_space(n))) if scheme.query_space(n) > 1 else 0,
            upload_bits_info=log2(scheme.query_space(n)),
            download_bits=lx,
        )
        for n in ns
    )
    return value, RetrievalTranscript(theta=theta, set_index=bundle.set_index, records=records)


@dataclass
class DatabaseAudit:
    database: int
    query_space: int
    samples: int
    max_tv_distance: float
    marginal_deviation: float
    biased: bool


@dataclass
class TranscriptAudit:
    """Empirical shadow of the exact privacy audit; advisory only."""

    per_database: list[DatabaseAudit]
    max_tv_distance: float
    low_power: bool
    flagged: bool


def transcript_audit(
    transcripts_by_theta: dict[int, Sequence[RetrievalTranscript]],
    min_samples: int = 100,
    bias_sigmas: float = 4.0,
) -> TranscriptAudit:
    """Compare empirical per-database query distributions across desired
    messages (total-variation distance) and flag non-uniform pooled
    marginals, which the TV comparison alone cannot see."""
    if not transcripts_by_theta:
        raise ValueError("no transcripts to audit")
    thetas = sorted(transcripts_by_theta)
    sample_counts = {t: len(transcripts_by_theta[t]) for t in thetas}
    low_power = any(c < min_samples for c in sample_counts.values())

    databases = sorted(
        {rec.database for t in thetas for tr in transcripts_by_theta[t] for rec in tr.records}
    )
    per_db = []
    for n in databases:
        queries_by_theta = {
            t: [rec.query for tr in transcripts_by_theta[t] for rec in tr.records if rec.database == n]
            for t in thetas
        }
        space = max(
            rec.query_space
            for t in thetas
            for tr in transcripts_by_theta[t]
            for rec in tr.records
            if rec.database == n
        )
        dists = {}
        for t, qs in queries_by_theta.items():
            total = max(1, len(qs))
            dists[t] = [qs.count(q) / total for q in range(space)]
        max_tv = 0.0
        for a in thetas:
            for b in thetas:
                if a < b:
                    tv = sum(abs(x - y) for x, y in zip(dists[a], dists[b])) / 2
                    max_tv = max(max_tv, tv)
        pooled = [q for qs in queries_by_theta.values() for q in qs]
        total = max(1, len(pooled))
        uniform = 1.0 / space
        deviation = max(abs(pooled.count(q) / total - uniform) for q in range(space))
        threshold = bias_sigmas * (uniform * (1 - uniform) / total) ** 0.5
        per_db.append(
            DatabaseAudit(
                database=n,
                query_space=space,
                samples=total,
                max_tv_distance=max_tv,
                marginal_deviation=deviation,
                biased=space > 1 and deviation > threshold,
            )
        )
    return TranscriptAudit(
        per_database=per_db,
        max_tv_distance=max((d.max_tv_distance for d in per_db), default=0.0),
        low_power=low_power,
        flagged=any(d.biased for d in per_db),
    )
