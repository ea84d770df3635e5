"""
🕸️ 有向图核心模块
有向图表示、双度序列提取、可图性检验、边列表读写与子图预处理
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, EdgeListParseError

logger = logging.getLogger(__name__)

_NODES_DIRECTIVE = re.compile(r'^#\s*nodes\s+(\d+)\s*$')
_NODE_DIRECTIVE = re.compile(r'^#\s*node\s+(-?\d+)\s*$')


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DirectedGraph:
    """n 个节点的简单有向图（稠密 0/1 邻接矩阵，无自环、无重边）

    Attributes:
        adjacency: n×n 布尔矩阵，(i, j) 为 True 当且仅当存在边 i→j
        labels: 节点的原始标签（压缩编号前），长度 n
    """

    adjacency: np.ndarray
    labels: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        adj = np.asarray(self.adjacency)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise DomainError(f"邻接矩阵必须是方阵，实际形状 {adj.shape}")
        if adj.shape[0] < 2:
            raise DomainError(f"节点数至少为 2，实际为 {adj.shape[0]}")
        if adj.dtype != bool:
            if not np.isin(adj, (0, 1)).all():
                raise DomainError("邻接矩阵元素必须属于 {0, 1}")
            adj = adj.astype(bool)
        if adj.diagonal().any():
            raise DomainError("邻接矩阵对角线必须为 0（不允许自环）")
        object.__setattr__(self, 'adjacency', _frozen(adj))

        labels = tuple(range(adj.shape[0])) if self.labels is None else tuple(int(x) for x in self.labels)
        if len(labels) != adj.shape[0]:
            raise DomainError("节点标签数量与节点数不一致")
        object.__setattr__(self, 'labels', labels)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(self.adjacency))

    @classmethod
    def empty(cls, n: int) -> 'DirectedGraph':
        return cls(np.zeros((n, n), dtype=bool))

    @classmethod
    def complete(cls, n: int) -> 'DirectedGraph':
        return cls(~np.eye(n, dtype=bool))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> 'DirectedGraph':
        """由 0 基编号的边 (u, v) 构造有向图"""
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise DomainError(f"不允许自环: {u}→{v}")
            adj[u, v] = True
        return cls(adj)

    def edges(self) -> np.ndarray:
        """返回形状 (E, 2) 的边数组，按 (u, v) 字典序"""
        return np.argwhere(self.adjacency)

    def induced_subgraph(self, keep: Sequence[int]) -> 'DirectedGraph':
        """按节点下标取诱导子图，标签随之保留"""
        keep = np.asarray(keep, dtype=int)
        sub = self.adjacency[np.ix_(keep, keep)]
        return DirectedGraph(sub, labels=tuple(self.labels[i] for i in keep))


@dataclass(frozen=True)
class BiDegreeSequence:
    """双度序列 (d⁺, d⁻)：出度块与入度块"""

    out_degrees: np.ndarray
    in_degrees: np.ndarray

    def __post_init__(self):
        out = np.asarray(self.out_degrees)
        inn = np.asarray(self.in_degrees)
        if out.ndim != 1 or out.shape != inn.shape:
            raise DomainError("出度与入度必须是等长一维序列")
        if not (np.issubdtype(out.dtype, np.integer) and np.issubdtype(inn.dtype, np.integer)):
            if not (np.all(out == np.round(out)) and np.all(inn == np.round(inn))):
                raise DomainError("度必须为整数")
        if (out < 0).any() or (inn < 0).any():
            raise DomainError("度必须非负")
        object.__setattr__(self, 'out_degrees', _frozen(out.astype(np.int64)))
        object.__setattr__(self, 'in_degrees', _frozen(inn.astype(np.int64)))

    @property
    def n(self) -> int:
        return self.out_degrees.shape[0]

    def as_vector(self) -> np.ndarray:
        """拼接成 2n 维向量（出度块在前）"""
        return np.concatenate([self.out_degrees, self.in_degrees])

    @classmethod
    def from_vector(cls, values: Sequence[int]) -> 'BiDegreeSequence':
        values = np.asarray(values)
        if values.ndim != 1 or values.shape[0] % 2:
            raise DomainError("双度向量长度必须为偶数 2n")
        n = values.shape[0] // 2
        return cls(values[:n], values[n:])


@dataclass(frozen=True)
class IntegerBiSequence:
    """无约束的整数双序列 z = (z⁺, z⁻)，元素可为负或超过 n−1"""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.shape[0] % 2 or values.shape[0] < 2:
            raise DomainError("整数双序列长度必须为偶数 2n")
        if not np.issubdtype(values.dtype, np.integer):
            if not np.all(values == np.round(values)):
                raise DomainError("整数双序列必须为整数")
        object.__setattr__(self, 'values', _frozen(values.astype(np.int64)))

    @property
    def n(self) -> int:
        return self.values.shape[0] // 2

    @property
    def out_block(self) -> np.ndarray:
        return self.values[:self.n]

    @property
    def in_block(self) -> np.ndarray:
        return self.values[self.n:]

    def as_vector(self) -> np.ndarray:
        return self.values

    @classmethod
    def from_bidegree(cls, seq: BiDegreeSequence) -> 'IntegerBiSequence':
        return cls(seq.as_vector())


@dataclass
class EdgeListParse:
    """边列表解析结果"""

    graph: DirectedGraph
    self_loops_dropped: int = 0
    duplicates_collapsed: int = 0
    label_map: Dict[int, int] = field(default_factory=dict)


SequenceLike = Union[BiDegreeSequence, IntegerBiSequence, Sequence[int], np.ndarray]


def _as_vector(s: SequenceLike) -> np.ndarray:
    if isinstance(s, (BiDegreeSequence, IntegerBiSequence)):
        return s.as_vector()
    return np.asarray(s)


def parse_edge_list(text: Union[str, Iterable[str]]) -> EdgeListParse:
    """
    解析 "u v" 行格式的边列表

    '#' 开头为注释行，空行忽略；每行至少两个整数标签，多余列（如时间戳）忽略。
    形如 "# nodes N" 的注释声明 0..N−1 全部为节点，"# node L" 声明单个标签为节点（保留孤立点）。
    任意整数标签按升序压缩为 0..n−1。

    Args:
        text: 字符串或逐行可迭代对象（如打开的文件）

    Returns:
        EdgeListParse

    Raises:
        EdgeListParseError: 出现非整数标记
        DomainError: 不同节点少于 2 个
    """
    lines = text.splitlines() if isinstance(text, str) else text
    nodes = set()
    pairs = []
    self_loops = 0

    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            match = _NODES_DIRECTIVE.match(line)
            if match:
                nodes.update(range(int(match.group(1))))
            single = _NODE_DIRECTIVE.match(line)
            if single:
                nodes.add(int(single.group(1)))
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise EdgeListParseError(f"需要两个节点标签，实际为 '{line}'", line_number)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(f"节点标签不是整数: '{line}'", line_number) from None
        nodes.add(u)
        nodes.add(v)
        if u == v:
            self_loops += 1
            continue
        pairs.append((u, v))

    if len(nodes) < 2:
        raise DomainError(f"边列表中不同节点少于 2 个（实际 {len(nodes)} 个）")

    ordered = sorted(nodes)
    label_map = {label: index for index, label in enumerate(ordered)}
    adj = np.zeros((len(ordered), len(ordered)), dtype=bool)
    for u, v in pairs:
        adj[label_map[u], label_map[v]] = True

    graph = DirectedGraph(adj, labels=tuple(ordered))
    duplicates = len(pairs) - graph.num_edges
    if self_loops:
        logger.warning(f"丢弃自环 {self_loops} 条")
    logger.info(f"📥 边列表加载完成: {graph.n} 个节点, {graph.num_edges} 条边 (合并重复 {duplicates} 条)")
    return EdgeListParse(graph=graph, self_loops_dropped=self_loops,
                         duplicates_collapsed=duplicates, label_map=label_map)


def load_edge_list(text: Union[str, Iterable[str]]) -> DirectedGraph:
    """读取边列表并返回简单有向图（重复边合并、自环丢弃）"""
    return parse_edge_list(text).graph


def write_edge_list(g: DirectedGraph) -> str:
    """把有向图写成 "u v" 边列表文本，节点按原始标签输出

    标签恰为 0..n−1 时首行写 "# nodes n"；否则孤立点各写一行 "# node 标签"。
    """
    labels = g.labels
    if labels == tuple(range(g.n)):
        lines = [f"# nodes {g.n}"]
    else:
        adj = g.adjacency
        isolated = ~(adj.any(axis=0) | adj.any(axis=1))
        lines = [f"# node {labels[i]}" for i in np.flatnonzero(isolated)]
    lines.extend(f"{labels[u]} {labels[v]}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def bi_degree_sequence(g: DirectedGraph) -> BiDegreeSequence:
    """出度 = 行和，入度 = 列和"""
    adj = g.adjacency
    return BiDegreeSequence(adj.sum(axis=1), adj.sum(axis=0))


def fca_violations(out_degrees: np.ndarray, in_degrees: np.ndarray) -> np.ndarray:
    """
    计算 Fulkerson–Chen–Anstee 各前缀不等式的违背量

    按 (出度降序, 入度降序) 排序后，第 k 个分量为
    Σ_{i≤k} a_i − Σ_{i≤k} min(b_i, k−1) − Σ_{i>k} min(b_i, k)；
    全部 ≤ 0（且和相等、元素在 [0, n−1] 内）时序列可图。
    """
    a = np.asarray(out_degrees, dtype=np.int64)
    b = np.asarray(in_degrees, dtype=np.int64)
    order = np.lexsort((-b, -a))
    a = a[order]
    b = b[order]
    n = a.shape[0]
    k = np.arange(1, n + 1)
    position = np.arange(n)
    caps = k[:, None] - 1 + (position[None, :] >= k[:, None])
    rhs = np.minimum(b[None, :], caps).sum(axis=1)
    return np.cumsum(a) - rhs


def is_bigraphical(s: SequenceLike, n: Optional[int] = None) -> bool:
    """
    判断整数双序列能否由 n 个节点的简单无自环有向图实现

    Args:
        s: 双度序列、整数双序列或长度 2n 的数组
        n: 节点数（缺省时取长度的一半）
    """
    values = _as_vector(s)
    if n is None:
        n = values.shape[0] // 2
    if values.shape[0] != 2 * n:
        raise DomainError(f"序列长度 {values.shape[0]} 与 2n={2 * n} 不符")
    if not np.all(values == np.round(values)):
        return False
    values = values.astype(np.int64)
    out, inn = values[:n], values[n:]
    if (values < 0).any() or (values > n - 1).any():
        return False
    if out.sum() != inn.sum():
        return False
    return bool(fca_violations(out, inn).max() <= 0)


def graph_distance(g1: DirectedGraph, g2: DirectedGraph) -> int:
    """两图在非对角元上的汉明距离 δ(G, G′)"""
    if g1.n != g2.n:
        raise DomainError(f"节点数不一致: {g1.n} vs {g2.n}")
    return int(np.count_nonzero(g1.adjacency != g2.adjacency))


def _kept_nodes(adj: np.ndarray, min_out: int, min_in: int, iterate: bool) -> np.ndarray:
    keep = np.arange(adj.shape[0])
    while True:
        sub = adj[np.ix_(keep, keep)]
        failing = (sub.sum(axis=1) <= min_out) | (sub.sum(axis=0) <= min_in)
        if not failing.any():
            return keep
        keep = keep[~failing]
        if not iterate or keep.shape[0] == 0:
            return keep


def _subgraph_or_raise(g: DirectedGraph, keep: np.ndarray, what: str) -> Tuple[DirectedGraph, np.ndarray]:
    if keep.shape[0] < 2:
        logger.error(f"{what}后剩余节点不足 2 个")
        raise DomainError(f"{what}后剩余节点不足 2 个（剩余 {keep.shape[0]} 个）")
    return g.induced_subgraph(keep), keep


def preprocess_subgraph(g: DirectedGraph, min_out: int, min_in: int) -> Tuple[DirectedGraph, np.ndarray]:
    """
    反复删除出度 ≤ min_out 或入度 ≤ min_in 的节点直到不动点

    "大于阈值"语义：保留下来的节点出度 > min_out 且入度 > min_in。

    Returns:
        (诱导子图, 标签映射)，映射的第 k 个元素是新节点 k 在输入图中的下标

    Raises:
        DomainError: 剩余节点不足 2 个
    """
    keep = _kept_nodes(g.adjacency, min_out, min_in, iterate=True)
    sub, keep = _subgraph_or_raise(g, keep, "度过滤")
    logger.info(f"✂️ 子图预处理: {g.n} → {sub.n} 个节点 (阈值 出度>{min_out}, 入度>{min_in})")
    return sub, keep


def single_pass_filter(g: DirectedGraph, min_out: int, min_in: int) -> Tuple[DirectedGraph, np.ndarray]:
    """只按原图的度过滤一次（不迭代），用于与迭代结果对照"""
    keep = _kept_nodes(g.adjacency, min_out, min_in, iterate=False)
    return _subgraph_or_raise(g, keep, "单次度过滤")


def drop_zero_degree(g: DirectedGraph) -> Tuple[DirectedGraph, np.ndarray]:
    """一次性删除出度为 0 或入度为 0 的节点（此类节点使 MLE 不存在）"""
    sub, keep = single_pass_filter(g, 0, 0)
    logger.info(f"删除零度节点 {g.n - sub.n} 个，剩余 {sub.n} 个")
    return sub, keep


def degree_quantiles(seq: BiDegreeSequence,
                     qs: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0)) -> Dict[str, List[float]]:
    """出度与入度的分位数摘要"""
    return {
        'quantiles': [float(q) for q in qs],
        'out': [float(x) for x in np.quantile(seq.out_degrees, qs)],
        'in': [float(x) for x in np.quantile(seq.in_degrees, qs)],
    }
