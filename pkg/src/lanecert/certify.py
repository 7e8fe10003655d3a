"""Prover and local verifier for the edge-label certification scheme.

The prover runs the whole pipeline (intervals, lane partition, completion,
hierarchical decomposition, class evaluation) and flattens the result into
per-edge bitstring labels.  The verifier is a pure function of one vertex's
local view: its id, its input tags, and the labels of incident edges.  If
every vertex accepts, the graph satisfies the property and admits a lane
structure within the width bound; a single reject refutes the certificate.

Label layout: a list of self-delimiting sections.  Every label starts with a
header (n and the lane count), followed by one section per decomposition
node containing the edge (root first), followed by embedding sections for
the virtual-edge routes the edge participates in.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .encoding import (
    BitReader,
    Bits,
    BitWriter,
    DecodeError,
    read_sections,
    read_term,
    write_section,
    write_term,
)
from .graph import Edge, Graph, bfs_parents, edge_key, id_bits, is_connected
from .intervals import (
    IntervalRepresentation,
    PathDecomposition,
    decomposition_to_intervals,
    validate,
    width,
)
from .lanes import Embedding, LanePartition, build_lane_partition, lane_bounds
from .properties import (
    HomClass,
    PropertyError,
    PropertyPlugin,
    annotate_classes,
    get_plugin,
)
from .recursive import (
    BNodeData,
    ENodeData,
    HierarchicalDecomposition,
    PNodeData,
    TNode,
    VLeaf,
    build_hierarchical_decomposition,
    completion_to_op_sequence,
)

SEC_HEADER = 1
SEC_TNODE = 2
SEC_ROUTE = 3

SECTION_NAMES = {SEC_HEADER: "header", SEC_TNODE: "tnode", SEC_ROUTE: "route"}


class CertifyError(Exception):
    pass


# --- wire structures ---------------------------------------------------------


@dataclass
class BasicInfo:
    """Terminal maps plus the homomorphism class of a fragment."""

    t_in: Dict[int, int]
    t_out: Dict[int, int]
    cls: HomClass

    def lanes(self):
        return sorted(self.t_in)

    def terminal_ids(self):
        return set(self.t_in.values()) | set(self.t_out.values())


# topology tuples:
#   ("E", lane, vin, vout, mark)
#   ("P", vids, marks)
#   ("B", i, j, bridge, bmark, left, right)   side: ("V", lane, vertex)
#                                                or ("T", node_eid, BasicInfo)
@dataclass
class ElementRecord:
    eid: int
    parent_eid: Optional[int]
    topo: tuple
    children: Tuple[Tuple[int, BasicInfo], ...]

    @property
    def kind(self) -> str:
        return self.topo[0]


@dataclass
class TSec:
    node_eid: int
    is_root: bool
    basic: BasicInfo
    dist: int
    is_tree: bool
    parent_min: bool
    elem: ElementRecord


@dataclass
class RSec:
    u: int
    v: int
    idx: int
    fwd: int
    bwd: int
    payload: Bits


@dataclass
class DecodedLabel:
    n: int
    w: int
    tnodes: List[TSec]
    routes: List[RSec]


# --- encoding ----------------------------------------------------------------


def _enc_basic(w: BitWriter, bi: BasicInfo, b: int) -> None:
    lanes = bi.lanes()
    w.write_varint(len(lanes))
    for lane in lanes:
        w.write_varint(lane)
        w.write_uint(bi.t_in[lane], b)
        w.write_uint(bi.t_out[lane], b)
    write_term(w, bi.cls.term)


def _dec_basic(r: BitReader, b: int, n: int) -> BasicInfo:
    count = r.read_varint()
    if not 1 <= count <= n:
        raise DecodeError("bad lane count")
    t_in: Dict[int, int] = {}
    t_out: Dict[int, int] = {}
    prev = 0
    for _ in range(count):
        lane = r.read_varint()
        if lane <= prev:
            raise DecodeError("lanes must be increasing and positive")
        prev = lane
        vin = r.read_uint(b)
        vout = r.read_uint(b)
        if vin >= n or vout >= n:
            raise DecodeError("terminal id out of range")
        t_in[lane] = vin
        t_out[lane] = vout
    if len(set(t_in.values())) != count or len(set(t_out.values())) != count:
        raise DecodeError("terminal maps must be injective")
    term = read_term(r)
    atoms = []
    for lane in t_in:
        if t_in[lane] == t_out[lane]:
            atoms.append((lane, 0))
        else:
            atoms.append((lane, 1))
            atoms.append((lane, 2))
    return BasicInfo(t_in, t_out, HomClass(tuple(sorted(atoms)), term))


def _enc_side(w: BitWriter, side: tuple, b: int) -> None:
    if side[0] == "V":
        w.write_bit(0)
        w.write_varint(side[1])
        w.write_uint(side[2], b)
    else:
        w.write_bit(1)
        w.write_varint(side[1])
        _enc_basic(w, side[2], b)


def _dec_side(r: BitReader, b: int, n: int) -> tuple:
    if r.read_bit() == 0:
        lane = r.read_varint()
        vertex = r.read_uint(b)
        if lane < 1 or vertex >= n:
            raise DecodeError("bad leaf side")
        return ("V", lane, vertex)
    node_eid = r.read_varint()
    return ("T", node_eid, _dec_basic(r, b, n))


_KINDS = ("E", "P", "B")


def _enc_elem(w: BitWriter, rec: ElementRecord, b: int) -> None:
    w.write_varint(rec.eid)
    w.write_bit(rec.parent_eid is not None)
    if rec.parent_eid is not None:
        w.write_varint(rec.parent_eid)
    w.write_uint(_KINDS.index(rec.kind), 2)
    t = rec.topo
    if t[0] == "E":
        w.write_varint(t[1])
        w.write_uint(t[2], b)
        w.write_uint(t[3], b)
        w.write_bit(t[4])
    elif t[0] == "P":
        vids, marks = t[1], t[2]
        w.write_varint(len(vids))
        for v in vids:
            w.write_uint(v, b)
        for m in marks:
            w.write_bit(m)
    else:
        _, i, j, bridge, bmark, left, right = t
        w.write_varint(i)
        w.write_varint(j)
        w.write_uint(bridge[0], b)
        w.write_uint(bridge[1], b)
        w.write_bit(bmark)
        _enc_side(w, left, b)
        _enc_side(w, right, b)
    w.write_varint(len(rec.children))
    for ceid, csub in rec.children:
        w.write_varint(ceid)
        _enc_basic(w, csub, b)


def _dec_elem(r: BitReader, b: int, n: int) -> ElementRecord:
    eid = r.read_varint()
    parent = r.read_varint() if r.read_bit() else None
    kidx = r.read_uint(2)
    if kidx > 2:
        raise DecodeError("bad element kind")
    kind = _KINDS[kidx]
    if kind == "E":
        lane = r.read_varint()
        vin = r.read_uint(b)
        vout = r.read_uint(b)
        mark = r.read_bit()
        if lane < 1 or vin >= n or vout >= n or vin == vout:
            raise DecodeError("bad edge element")
        topo = ("E", lane, vin, vout, mark)
    elif kind == "P":
        wp = r.read_varint()
        if not 1 <= wp <= n:
            raise DecodeError("bad path width")
        vids = tuple(r.read_uint(b) for _ in range(wp))
        if len(set(vids)) != wp or any(v >= n for v in vids):
            raise DecodeError("bad path vertices")
        marks = tuple(r.read_bit() for _ in range(wp - 1))
        topo = ("P", vids, marks)
    else:
        i = r.read_varint()
        j = r.read_varint()
        bu = r.read_uint(b)
        bv = r.read_uint(b)
        bmark = r.read_bit()
        left = _dec_side(r, b, n)
        right = _dec_side(r, b, n)
        if not bu < bv < n:
            raise DecodeError("bad bridge edge")
        topo = ("B", i, j, (bu, bv), bmark, left, right)
    nc = r.read_varint()
    if nc > n:
        raise DecodeError("bad child count")
    children = []
    for _ in range(nc):
        ceid = r.read_varint()
        children.append((ceid, _dec_basic(r, b, n)))
    if len({c for c, _ in children}) != nc:
        raise DecodeError("duplicate child eids")
    return ElementRecord(eid, parent, topo, tuple(children))


def encode_label(n: int, w_lanes: int, tnodes: List[TSec], routes: List[RSec]) -> Bits:
    b = id_bits(n)
    out = BitWriter()
    hw = BitWriter()
    hw.write_varint(n)
    hw.write_varint(w_lanes)
    write_section(out, SEC_HEADER, hw.getvalue())
    for sec in tnodes:
        sw = BitWriter()
        sw.write_varint(sec.node_eid)
        sw.write_bit(sec.is_root)
        _enc_basic(sw, sec.basic, b)
        sw.write_varint(sec.dist)
        sw.write_bit(sec.is_tree)
        sw.write_bit(sec.parent_min)
        _enc_elem(sw, sec.elem, b)
        write_section(out, SEC_TNODE, sw.getvalue())
    for rs in routes:
        rw = BitWriter()
        rw.write_uint(rs.u, b)
        rw.write_uint(rs.v, b)
        rw.write_varint(rs.idx)
        rw.write_varint(rs.fwd)
        rw.write_varint(rs.bwd)
        rw.write_varint(rs.payload.nbits)
        rw.write_bits(rs.payload)
        write_section(out, SEC_ROUTE, rw.getvalue())
    return out.getvalue()


def decode_label(bits: Bits) -> DecodedLabel:
    secs = read_sections(bits)
    if not secs or secs[0][0] != SEC_HEADER:
        raise DecodeError("label must start with a header section")
    hr = BitReader(secs[0][1])
    n = hr.read_varint()
    w = hr.read_varint()
    if n < 1 or w < 1:
        raise DecodeError("bad header")
    b = id_bits(n)
    tnodes: List[TSec] = []
    routes: List[RSec] = []
    for stype, payload in secs[1:]:
        r = BitReader(payload)
        if stype == SEC_TNODE:
            node_eid = r.read_varint()
            is_root = bool(r.read_bit())
            basic = _dec_basic(r, b, n)
            dist = r.read_varint()
            is_tree = bool(r.read_bit())
            parent_min = bool(r.read_bit())
            elem = _dec_elem(r, b, n)
            tnodes.append(
                TSec(node_eid, is_root, basic, dist, is_tree, parent_min, elem)
            )
        elif stype == SEC_ROUTE:
            u = r.read_uint(b)
            v = r.read_uint(b)
            idx = r.read_varint()
            fwd = r.read_varint()
            bwd = r.read_varint()
            nb = r.read_varint()
            if u >= n or v >= n or u == v or fwd < 1 or bwd < 1:
                raise DecodeError("bad route section")
            routes.append(RSec(u, v, idx, fwd, bwd, r.read_bits(nb)))
        elif stype == SEC_HEADER:
            raise DecodeError("duplicate header")
        else:
            raise DecodeError("unknown section type %d" % stype)
    return DecodedLabel(n, w, tnodes, routes)


# --- the standalone pointer scheme ------------------------------------------


@dataclass(frozen=True)
class PointerLabel:
    target: int
    parent: int
    dist: int
    is_tree: bool


def pointer_labels(g: Graph, target: int) -> Dict[Edge, PointerLabel]:
    """Label every edge so local checks certify that `target` exists."""
    if not is_connected(g):
        raise CertifyError("pointer scheme requires a connected graph")
    dist, parents = bfs_parents(g.adj, target)
    out: Dict[Edge, PointerLabel] = {}
    for e in g.edges:
        u, v = e
        if parents.get(u) == v:
            out[e] = PointerLabel(target, v, dist[v], True)
        elif parents.get(v) == u:
            out[e] = PointerLabel(target, u, dist[u], True)
        else:
            out[e] = PointerLabel(target, u, 0, False)
    return out


def verify_pointer(vid: int, incident: Dict[Edge, PointerLabel]) -> bool:
    """Local check of the pointer scheme at one vertex."""
    if not incident:
        return True  # isolated vertex certifies only itself
    targets = {l.target for l in incident.values()}
    if len(targets) != 1:
        return False
    target = targets.pop()
    for e, l in incident.items():
        if vid not in e or l.parent not in e:
            return False
    if vid == target:
        return all(
            l.is_tree and l.parent == vid and l.dist == 0
            for l in incident.values()
        )
    up = [l for l in incident.values() if l.is_tree and l.parent != vid]
    if len(up) != 1:
        return False
    d = up[0].dist
    return all(
        l.dist == d + 1
        for l in incident.values()
        if l.is_tree and l.parent == vid
    )


def encode_pointer_label(l: PointerLabel, n: int) -> Bits:
    b = id_bits(n)
    w = BitWriter()
    w.write_uint(l.target, b)
    w.write_uint(l.parent, b)
    w.write_varint(l.dist)
    w.write_bit(l.is_tree)
    return w.getvalue()


# --- prover ------------------------------------------------------------------


def resolve_property(name: str) -> Tuple[str, bool, PropertyPlugin]:
    """(base name, user asked for the marked variant, internal marked plugin).

    Certification always evaluates the marked variant internally: real edges
    are the marked subset of the completed graph.
    """
    marked = name.startswith("marked-")
    base = name[len("marked-"):] if marked else name
    get_plugin(base)  # existence check with a helpful error
    return base, marked, get_plugin("marked-" + base)


def _node_basic(node: TNode, ann) -> BasicInfo:
    r = node.root_element
    return BasicInfo(dict(r.sub_in), dict(r.sub_out), ann.tnode[r.eid])


def _sub_basic(el, ann) -> BasicInfo:
    return BasicInfo(dict(el.sub_in), dict(el.sub_out), ann.sub[el.eid])


def _collect_nodes(hd: HierarchicalDecomposition) -> List[TNode]:
    """All T-nodes, parents before the T-nodes nested inside their B sides."""
    out = []
    queue = deque([hd.root])
    while queue:
        node = queue.popleft()
        out.append(node)
        for el in node.elements():
            if el.kind == "B":
                for child in (el.payload.left, el.payload.right):
                    if isinstance(child, TNode):
                        queue.append(child)
    return out


def _pointer_fields(node: TNode) -> Dict[Edge, Tuple[int, bool, bool]]:
    """(dist, is_tree, parent_min) per fragment edge, rooted at the node's
    first in-terminal."""
    kl = node.klane
    target = kl.t_in[min(kl.lanes)]
    adj: Dict[int, List[int]] = {v: [] for v in kl.vertices}
    for u, v in kl.edges:
        adj[u].append(v)
        adj[v].append(u)
    parent = {target: None}
    dist = {target: 0}
    queue = deque([target])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                parent[w] = u
                queue.append(w)
    assert len(dist) == len(kl.vertices), "fragment must be connected"
    out = {}
    for e in kl.edges:
        u, v = e
        if parent.get(u) == v:
            out[e] = (dist[v], True, v == min(e))
        elif parent.get(v) == u:
            out[e] = (dist[u], True, u == min(e))
        else:
            out[e] = (0, False, False)
    return out


def prove(
    g: Graph,
    prop_name: str,
    k: int,
    ir: Optional[IntervalRepresentation] = None,
    force: bool = False,
) -> Dict[Edge, Bits]:
    """Produce the per-edge labels certifying prop_name and width bound k.

    Refuses (raises CertifyError) when the statement is false, unless force
    is set, in which case the honest-but-rejecting labels are still emitted
    (useful for adversarial testing).
    """
    if not is_connected(g):
        raise CertifyError("graph must be connected")
    if k < 0:
        raise CertifyError("width bound must be non-negative")
    base, marked_user, plugin = resolve_property(prop_name)
    if ir is None:
        try:
            from .graph import exact_pathwidth

            pw, bags = exact_pathwidth(g)
        except Exception as exc:
            raise CertifyError(
                "no interval witness given and exact search failed: %s" % exc
            )
        if pw > k:
            raise CertifyError("pathwidth %d exceeds bound %d" % (pw, k))
        ir = decomposition_to_intervals(g, PathDecomposition(bags))
    else:
        bad = validate(g, ir)
        if bad is not None:
            raise CertifyError("invalid interval witness: %s" % (bad,))
        if width(ir) > k + 1:
            raise CertifyError(
                "witness width %d exceeds %d" % (width(ir), k + 1)
            )
    lp, emb = build_lane_partition(g, ir)
    assert lp.k <= lane_bounds(k + 1)[0]
    s = completion_to_op_sequence(g, ir, lp)
    hd = build_hierarchical_decomposition(s)
    emarks: Dict[Edge, int] = {}
    for e in g.edges:
        relevant = g.edge_tag(*e) != 0 if marked_user else True
        emarks[e] = 1 if relevant else 0
    ann = annotate_classes(hd, plugin, emarks)
    if not ann.accepted and not force:
        raise CertifyError("property %r does not hold" % prop_name)
    return _emit_labels(g, k, hd, ann, emb, lp, emarks, plugin)


def _simplify_path(path: List[int]) -> List[int]:
    """Cut the loops out of a walk; the verifier needs each route to visit
    every host edge at most once."""
    out: List[int] = []
    pos: Dict[int, int] = {}
    for v in path:
        if v in pos:
            while len(out) > pos[v] + 1:
                del pos[out.pop()]
        else:
            pos[v] = len(out)
            out.append(v)
    return out


def _emit_labels(g, k, hd, ann, emb: Embedding, lp, emarks, plugin) -> Dict[Edge, Bits]:
    n = g.n
    w_lanes = lp.k
    real = g.edge_set()
    nodes = _collect_nodes(hd)
    chains: Dict[Edge, List[TSec]] = {}
    for node in nodes:
        nb = _node_basic(node, ann)
        ptr = _pointer_fields(node)
        parent_eid: Dict[int, Optional[int]] = {node.root_element.eid: None}
        for el in node.elements():
            for c in el.children:
                parent_eid[c.eid] = el.eid
        for el in node.elements():
            rec = _make_record(el, parent_eid[el.eid], ann, emarks)
            for e in el.klane_own.edges:
                dist, is_tree, pmin = ptr[e]
                chains.setdefault(e, []).append(
                    TSec(
                        node.root_element.eid,
                        node is hd.root,
                        nb,
                        dist,
                        is_tree,
                        pmin,
                        rec,
                    )
                )
    bound = 2 * max(1, w_lanes)
    for e, chain in chains.items():
        assert len(chain) <= bound, "node sections exceed the depth bound"
    bits: Dict[Edge, Bits] = {
        e: encode_label(n, w_lanes, chain, []) for e, chain in chains.items()
    }
    routes: Dict[Edge, List[RSec]] = {e: [] for e in real}
    for ve in sorted(set(chains) - real):
        path = _simplify_path(emb.routes[ve])
        m = len(path) - 1
        for pos in range(m):
            e = edge_key(path[pos], path[pos + 1])
            routes[e].append(
                RSec(path[0], path[-1], 0, pos + 1, m - pos, bits[ve])
            )
    h_bound = lane_bounds(k + 1)[2]
    out: Dict[Edge, Bits] = {}
    for e in real:
        assert len(routes[e]) <= h_bound, "route congestion exceeds h"
        out[e] = encode_label(n, w_lanes, chains[e], routes[e])
    return out


def _make_record(el, parent_eid, ann, emarks) -> ElementRecord:
    markf = lambda e: 1 if emarks.get(e, 0) else 0
    if el.kind == "E":
        d: ENodeData = el.payload
        e = edge_key(d.vin, d.vout)
        topo = ("E", d.lane, d.vin, d.vout, markf(e))
    elif el.kind == "P":
        d: PNodeData = el.payload
        marks = tuple(markf(edge_key(x, y)) for x, y in zip(d.vids, d.vids[1:]))
        topo = ("P", tuple(d.vids), marks)
    else:
        d: BNodeData = el.payload

        def side(child):
            if isinstance(child, VLeaf):
                return ("V", child.lane, child.vertex)
            return ("T", child.root_element.eid, _node_basic(child, ann))

        topo = ("B", d.i, d.j, d.bridge, markf(d.bridge), side(d.left), side(d.right))
    children = tuple(
        (c.eid, _sub_basic(c, ann))
        for c in sorted(el.children, key=lambda c: c.eid)
    )
    return ElementRecord(el.eid, parent_eid, topo, children)


# --- verifier ----------------------------------------------------------------


@dataclass
class LocalView:
    """Everything a vertex may use: its id and tag, plus incident edge
    labels and incident edge input tags."""

    vid: int
    vtag: int
    labels: Dict[Edge, Bits]
    etags: Dict[Edge, int]


@dataclass(frozen=True)
class Verdict:
    vid: int
    accept: bool
    reason: str = "-"


class _Reject(Exception):
    def __init__(self, code):
        super().__init__(code)
        self.code = code


def _own_terms(rec: ElementRecord, plugin: PropertyPlugin):
    """(t_in, t_out, own class) of an element record's own fragment."""
    t = rec.topo
    if t[0] == "E":
        _, lane, vin, vout, mark = t
        return {lane: vin}, {lane: vout}, plugin.base_edge(lane, mark)
    if t[0] == "P":
        _, vids, marks = t
        tm = {i + 1: v for i, v in enumerate(vids)}
        return tm, dict(tm), plugin.base_path(len(vids), list(marks))
    _, i, j, bridge, bmark, left, right = t

    def side_maps(side):
        if side[0] == "V":
            return {side[1]: side[2]}, {side[1]: side[2]}, plugin.base_vleaf(side[1])
        basic = side[2]
        return dict(basic.t_in), dict(basic.t_out), basic.cls

    lin, lout, lcls = side_maps(left)
    rin, rout, rcls = side_maps(right)
    if set(lin) & set(rin):
        raise _Reject("bridge-lanes")
    if i not in lout or j not in rout:
        raise _Reject("bridge-lanes")
    if edge_key(lout[i], rout[j]) != bridge:
        raise _Reject("bridge-endpoints")
    cls = plugin.compose_bridge(lcls, rcls, i, j, bmark)
    return {**lin, **rin}, {**lout, **rout}, cls


def _recompute_sub(rec: ElementRecord, plugin: PropertyPlugin) -> BasicInfo:
    """Fold the claimed child subtree infos onto the element's own fragment,
    checking the glue conditions the terminal ids impose."""
    t_in, t_out, cls = _own_terms(rec, plugin)
    lanes = set(t_in)
    seen_lanes: set = set()
    cur_out = dict(t_out)
    for _, csub in rec.children:
        clanes = set(csub.t_in)
        if not clanes <= lanes:
            raise _Reject("child-lanes")
        if clanes & seen_lanes:
            raise _Reject("sibling-lanes")
        seen_lanes |= clanes
        for lane in clanes:
            if csub.t_in[lane] != cur_out[lane]:
                raise _Reject("glue")
        cls = plugin.compose_parent(csub.cls, cls)
        for lane in clanes:
            cur_out[lane] = csub.t_out[lane]
    return BasicInfo(t_in, cur_out, cls)


def _topo_edges(rec: ElementRecord) -> List[Tuple[Edge, int]]:
    """(edge, mark) pairs of the record's directly listed topology edges."""
    t = rec.topo
    if t[0] == "E":
        return [(edge_key(t[2], t[3]), t[4])]
    if t[0] == "P":
        vids, marks = t[1], t[2]
        return [
            (edge_key(x, y), m) for (x, y), m in zip(zip(vids, vids[1:]), marks)
        ]
    return [(t[3], t[4])]


def _basic_eq(a: BasicInfo, b: BasicInfo) -> bool:
    return a.t_in == b.t_in and a.t_out == b.t_out and a.cls == b.cls


def verify_vertex(
    view: LocalView,
    prop_name: str,
    k: int,
    cache: Optional[Dict[Edge, object]] = None,
) -> Verdict:
    """Run all local checks at one vertex; total on arbitrary labels."""
    base, marked_user, plugin = resolve_property(prop_name)
    try:
        _verify_vertex(view, marked_user, plugin, k, cache)
    except _Reject as rj:
        return Verdict(view.vid, False, rj.code)
    except (DecodeError, PropertyError):
        return Verdict(view.vid, False, "malformed")
    return Verdict(view.vid, True)


def _decode_cached(e: Edge, bits: Bits, cache) -> DecodedLabel:
    if cache is not None and e in cache:
        hit = cache[e]
        if isinstance(hit, Exception):
            raise hit
        return hit
    try:
        lab = decode_label(bits)
    except DecodeError as exc:
        if cache is not None:
            cache[e] = exc
        raise
    if cache is not None:
        cache[e] = lab
    return lab


def _verify_vertex(view, marked_user, plugin, k, cache) -> None:
    vid = view.vid
    if not view.labels:
        # No incident edges: the vertex is the whole (connected) graph.
        if not plugin.accepts(plugin.base_path(1, [])):
            raise _Reject("root-class")
        return
    decoded: Dict[Edge, DecodedLabel] = {}
    for e, bits in view.labels.items():
        try:
            decoded[e] = _decode_cached(e, bits, cache)
        except DecodeError:
            raise _Reject("decode")
    headers = {(lab.n, lab.w) for lab in decoded.values()}
    if len(headers) != 1:
        raise _Reject("header")
    n, w_lanes = headers.pop()
    if vid >= n or w_lanes > lane_bounds(k + 1)[0]:
        raise _Reject("header")

    # Routes: group by (u, v, idx), check rank structure, extract the labels
    # of virtual edges incident to this vertex.
    groups: Dict[tuple, List[Tuple[Edge, RSec]]] = {}
    for e, lab in decoded.items():
        seen_here = set()
        for rs in lab.routes:
            key = (rs.u, rs.v, rs.idx)
            if key in seen_here:
                raise _Reject("route-dup")
            seen_here.add(key)
            groups.setdefault(key, []).append((e, rs))
    virtuals: Dict[Edge, DecodedLabel] = {}
    for (u, v, idx), entries in groups.items():
        if len({(rs.payload.value, rs.payload.nbits) for _, rs in entries}) != 1:
            raise _Reject("route-payload")
        if len({rs.fwd + rs.bwd for _, rs in entries}) != 1:
            raise _Reject("route-rank")
        if len(entries) > 2:
            raise _Reject("route-degree")
        if len(entries) == 2:
            if vid in (u, v):
                raise _Reject("route-endpoint")
            f1, f2 = sorted(rs.fwd for _, rs in entries)
            if f2 != f1 + 1:
                raise _Reject("route-rank")
        else:
            (_, rs) = entries[0]
            if vid == u:
                if rs.fwd != 1:
                    raise _Reject("route-rank")
            elif vid == v:
                if rs.bwd != 1:
                    raise _Reject("route-rank")
            else:
                raise _Reject("route-endpoint")
        if vid in (u, v):
            ve = edge_key(u, v)
            if ve in decoded:
                raise _Reject("route-real")
            payload = entries[0][1].payload
            try:
                vlab = decode_label(payload)
            except DecodeError:
                raise _Reject("decode")
            if vlab.routes:
                raise _Reject("nested-route")
            if (vlab.n, vlab.w) != (n, w_lanes):
                raise _Reject("header")
            if ve in virtuals:
                raise _Reject("route-dup")
            virtuals[ve] = vlab

    # The vertex's view of the completed graph: real incident edges plus
    # virtual edges whose routes end here.
    gedges: Dict[Edge, Tuple[DecodedLabel, bool]] = {
        e: (lab, True) for e, lab in decoded.items()
    }
    for e, lab in virtuals.items():
        gedges[e] = (lab, False)

    node_entries: Dict[int, List[Tuple[Edge, TSec]]] = {}
    for e, (lab, real) in gedges.items():
        if vid not in e:
            raise _Reject("edge-endpoint")
        chain = lab.tnodes
        if not chain:
            raise _Reject("chain-empty")
        if len({sec.node_eid for sec in chain}) != len(chain):
            raise _Reject("chain-dup")
        if not chain[0].is_root or any(sec.is_root for sec in chain[1:]):
            raise _Reject("chain-root")
        for pos, sec in enumerate(chain):
            last = pos == len(chain) - 1
            topo = [(te, m) for te, m in _topo_edges(sec.elem)]
            here = [(te, m) for te, m in topo if te == e]
            if last:
                if not here:
                    raise _Reject("chain-leaf")
                mark = here[0][1]
                if real:
                    tag = view.etags.get(e, 0)
                    expect = (tag != 0) if marked_user else True
                    if mark != (1 if expect else 0):
                        raise _Reject("mark")
                elif mark != 0:
                    raise _Reject("mark")
            else:
                if sec.elem.kind != "B" or here:
                    raise _Reject("chain-link")
                nxt = chain[pos + 1].node_eid
                sides = [
                    s
                    for s in (sec.elem.topo[5], sec.elem.topo[6])
                    if s[0] == "T" and s[1] == nxt
                ]
                if not sides:
                    raise _Reject("chain-link")
                if not _basic_eq(sides[0][2], chain[pos + 1].basic):
                    raise _Reject("side-basic")
            node_entries.setdefault(sec.node_eid, []).append((e, sec))

    all_edges = set(gedges)
    root_eids = set()
    for node_eid, entries in node_entries.items():
        first = entries[0][1]
        for _, sec in entries[1:]:
            if sec.is_root != first.is_root or not _basic_eq(sec.basic, first.basic):
                raise _Reject("node-shared")
        basic = first.basic
        if first.is_root:
            root_eids.add(node_eid)
            if len(basic.t_in) != w_lanes:
                raise _Reject("header")
            if {e for e, _ in entries} != all_edges:
                raise _Reject("root-cover")
        else:
            if {e for e, _ in entries} != all_edges:
                if vid not in basic.terminal_ids():
                    raise _Reject("boundary")
        _check_pointer(vid, basic, entries)
        _check_elements(vid, node_eid, basic, entries, gedges, w_lanes, plugin)
    if len(root_eids) != 1:
        raise _Reject("chain-root")
    root_basic = node_entries[root_eids.pop()][0][1].basic
    if not plugin.accepts(root_basic.cls):
        raise _Reject("root-class")


def _check_pointer(vid, basic: BasicInfo, entries) -> None:
    target = basic.t_in[min(basic.t_in)]

    def parent_end(e, sec):
        return min(e) if sec.parent_min else max(e)

    if vid == target:
        for e, sec in entries:
            if not sec.is_tree or parent_end(e, sec) != vid or sec.dist != 0:
                raise _Reject("pointer-root")
        return
    up = [
        (e, sec)
        for e, sec in entries
        if sec.is_tree and parent_end(e, sec) != vid
    ]
    if len(up) != 1:
        raise _Reject("pointer")
    d = up[0][1].dist
    for e, sec in entries:
        if sec.is_tree and parent_end(e, sec) == vid and sec.dist != d + 1:
            raise _Reject("pointer")


def _check_elements(vid, node_eid, node_basic, entries, gedges, w_lanes, plugin):
    recs: Dict[int, ElementRecord] = {}
    for _, sec in entries:
        rec = recs.get(sec.elem.eid)
        if rec is None:
            recs[sec.elem.eid] = sec.elem
        elif rec != sec.elem:
            raise _Reject("elem-shared")
    subs: Dict[int, BasicInfo] = {}

    def sub_of(eid):
        if eid not in subs:
            subs[eid] = _recompute_sub(recs[eid], plugin)
        return subs[eid]

    for rec in recs.values():
        t_in, t_out, _ = _own_terms(rec, plugin)
        # Listed topology edges at this vertex must actually be present and
        # owned by this element in this node.
        for te, _mark in _topo_edges(rec):
            if vid not in te:
                continue
            hit = gedges.get(te)
            if hit is None:
                raise _Reject("edge-missing")
            owner = [s for s in hit[0].tnodes if s.node_eid == node_eid]
            if not owner or owner[0].elem.eid != rec.eid:
                raise _Reject("edge-owner")
        # Downward: children glued at this vertex must be visible and agree.
        for ceid, csub in rec.children:
            if vid in csub.t_in.values():
                crec = recs.get(ceid)
                if crec is None:
                    raise _Reject("child-missing")
                if crec.parent_eid != rec.eid:
                    raise _Reject("parent-link")
                if not _basic_eq(sub_of(ceid), csub):
                    raise _Reject("child-basic")
        # Upward: this element's parent must be visible where it glues on.
        if rec.parent_eid is not None and vid in t_in.values():
            prec = recs.get(rec.parent_eid)
            if prec is None:
                if not (
                    rec.parent_eid == node_eid
                    and w_lanes == 1
                    and len(node_basic.t_in) == 1
                    and vid == next(iter(node_basic.t_in.values()))
                ):
                    raise _Reject("parent-missing")
            else:
                listed = [cs for ce, cs in prec.children if ce == rec.eid]
                if not listed or not _basic_eq(listed[0], sub_of(rec.eid)):
                    raise _Reject("not-listed")
        if rec.eid == node_eid:
            if rec.parent_eid is not None:
                raise _Reject("parent-link")
            if not _basic_eq(sub_of(rec.eid), node_basic):
                raise _Reject("node-basic")
    # Edgeless single-lane root element: its merge is recomputed from the
    # children visible at its only terminal.
    if (
        node_eid not in recs
        and len(node_basic.t_in) == 1
        and vid == next(iter(node_basic.t_in.values()))
    ):
        lane = next(iter(node_basic.t_in))
        if lane != 1:
            raise _Reject("node-basic")
        kids = sorted(
            (rec for rec in recs.values() if rec.parent_eid == node_eid),
            key=lambda rec: rec.eid,
        )
        synth = ElementRecord(
            node_eid,
            None,
            ("P", (vid,), ()),
            tuple((rec.eid, sub_of(rec.eid)) for rec in kids),
        )
        if not _basic_eq(_recompute_sub(synth, plugin), node_basic):
            raise _Reject("node-basic")


def verify_all(
    g: Graph, labels: Dict[Edge, Bits], prop_name: str, k: int
) -> Dict[int, Verdict]:
    """Build every vertex's local view and verify them independently."""
    cache: Dict[Edge, object] = {}
    out: Dict[int, Verdict] = {}
    for v in range(g.n):
        incident = {edge_key(v, u): None for u in g.adj(v)}
        view = LocalView(
            v,
            g.vertex_tag(v),
            {e: labels.get(e, Bits()) for e in incident},
            {e: g.edge_tag(*e) for e in incident},
        )
        out[v] = verify_vertex(view, prop_name, k, cache)
    return out


def all_accept(verdicts: Dict[int, Verdict]) -> bool:
    return all(v.accept for v in verdicts.values())


def any_reject(g: Graph, labels: Dict[Edge, Bits], prop_name: str, k: int) -> bool:
    """Like not all_accept(verify_all(...)) but stops at the first reject."""
    cache: Dict[Edge, object] = {}
    for v in range(g.n):
        incident = {edge_key(v, u): None for u in g.adj(v)}
        view = LocalView(
            v,
            g.vertex_tag(v),
            {e: labels.get(e, Bits()) for e in incident},
            {e: g.edge_tag(*e) for e in incident},
        )
        if not verify_vertex(view, prop_name, k, cache).accept:
            return True
    return False


# --- size accounting and file formats ---------------------------------------


@dataclass
class LabelStats:
    count: int
    max_bits: int
    mean_bits: float
    total_bits: int
    per_section: Dict[str, int] = field(default_factory=dict)


def label_size_stats(labels: Dict[Edge, Bits]) -> LabelStats:
    per: Dict[str, int] = {}
    total = 0
    worst = 0
    for bits in labels.values():
        total += bits.nbits
        worst = max(worst, bits.nbits)
        try:
            secs = read_sections(bits)
        except DecodeError:
            per["opaque"] = per.get("opaque", 0) + bits.nbits
            continue
        framed = 0
        for stype, payload in secs:
            name = SECTION_NAMES.get(stype, "other")
            per[name] = per.get(name, 0) + payload.nbits
            framed += payload.nbits
        per["framing"] = per.get("framing", 0) + bits.nbits - framed
    mean = total / len(labels) if labels else 0.0
    return LabelStats(len(labels), worst, mean, total, per)


def write_label_file(labels: Dict[Edge, Bits]) -> str:
    lines = []
    for (u, v) in sorted(labels):
        lines.append("%d %d %s" % (u, v, labels[(u, v)].to_hex()))
    return "\n".join(lines) + "\n" if lines else ""


def read_label_file(text: str) -> Dict[Edge, Bits]:
    out: Dict[Edge, Bits] = {}
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        parts = ln.split()
        if len(parts) != 3:
            raise CertifyError("bad label line: %r" % ln)
        u, v = int(parts[0]), int(parts[1])
        out[edge_key(u, v)] = Bits.from_hex(parts[2])
    return out


def write_verdict_file(verdicts: Dict[int, Verdict]) -> str:
    lines = []
    for vid in sorted(verdicts):
        vd = verdicts[vid]
        state = "accept" if vd.accept else "reject"
        lines.append("%d %s %s" % (vid, state, vd.reason))
    return "\n".join(lines) + "\n" if lines else ""
