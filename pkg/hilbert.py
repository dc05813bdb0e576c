"""
复合希尔伯特空间：子系统标签、混合进制基矢编号、张量积、嵌入与偏迹

约定：
- 子系统按列出顺序从高位到低位排列，|0₁1₂g₁⟩ 即 (C1=0, C2=1, A1=g)
- 原子 g ↦ 0, e ↦ 1；腔模光子数 n ↦ n
"""
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from config import config
from errors import ArgumentError, CompositionError, DimensionError

CAVITY = "cavity-mode"
ATOM = "two-level-atom"
KINDS = (CAVITY, ATOM)
ATOM_LEVELS = {"g": 0, "e": 1}


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SubsystemLabel:
    name: str
    kind: str
    dim: int = 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"未知子系统类型: {self.kind}")
        if int(self.dim) < 2:
            raise DimensionError(f"子系统 {self.name} 维数必须 ≥ 2，当前 {self.dim}")
        if self.kind == ATOM and self.dim != 2:
            raise DimensionError(f"二能级原子 {self.name} 维数必须为 2")

    @property
    def is_cavity(self) -> bool:
        return self.kind == CAVITY


def cavity(name: str, dim: int = None) -> SubsystemLabel:
    return SubsystemLabel(name, CAVITY, dim or config.DEFAULT_CAVITY_DIM)


def atom(name: str) -> SubsystemLabel:
    return SubsystemLabel(name, ATOM, 2)


@dataclass(frozen=True)
class SpaceSpec:
    subsystems: Tuple[SubsystemLabel, ...]

    def __post_init__(self):
        subs = tuple(self.subsystems)
        if not subs:
            raise ArgumentError("SpaceSpec 至少需要一个子系统")
        names = [s.name for s in subs]
        if len(set(names)) != len(names):
            raise CompositionError(f"子系统标签重复: {names}")
        object.__setattr__(self, "subsystems", subs)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.subsystems)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def __contains__(self, item) -> bool:
        return _name(item) in self.names

    def index_of(self, item: Union[str, SubsystemLabel]) -> int:
        name = _name(item)
        if name not in self.names:
            raise CompositionError(f"空间 {self.names} 中不存在子系统 {name}")
        return self.names.index(name)

    def label(self, item: Union[str, SubsystemLabel]) -> SubsystemLabel:
        return self.subsystems[self.index_of(item)]

    def encode(self, occupation: Sequence[int]) -> int:
        """混合进制编码：占据数元组 -> 基矢编号"""
        digits = self._digits(occupation)
        return int(np.ravel_multi_index(digits, self.dims))

    def decode(self, index: int) -> Tuple[int, ...]:
        if not 0 <= index < self.total_dim:
            raise DimensionError(f"基矢编号 {index} 超出范围 [0, {self.total_dim})")
        return tuple(int(d) for d in np.unravel_index(index, self.dims))

    def concat(self, other: "SpaceSpec") -> "SpaceSpec":
        return SpaceSpec(self.subsystems + other.subsystems)

    def subspace(self, keep: Iterable[Union[str, SubsystemLabel]]) -> "SpaceSpec":
        """保留 keep 中的子系统，维持原有相对顺序"""
        wanted = {_name(k) for k in keep}
        return SpaceSpec(tuple(s for s in self.subsystems if s.name in wanted))

    def _digits(self, occupation) -> Tuple[int, ...]:
        if isinstance(occupation, Mapping):
            missing = set(self.names) - set(occupation)
            if missing:
                raise ArgumentError(f"占据数缺少子系统: {sorted(missing)}")
            occupation = [occupation[n] for n in self.names]
        occupation = list(occupation)
        if len(occupation) != len(self.subsystems):
            raise ArgumentError(f"占据数长度 {len(occupation)} 与子系统个数 {len(self.subsystems)} 不符")
        digits = []
        for sub, level in zip(self.subsystems, occupation):
            if isinstance(level, str):
                if sub.kind != ATOM or level not in ATOM_LEVELS:
                    raise DimensionError(f"子系统 {sub.name} 不接受能级 {level!r}")
                level = ATOM_LEVELS[level]
            level = int(level)
            if not 0 <= level < sub.dim:
                raise DimensionError(f"子系统 {sub.name} 的能级 {level} 超出维数 {sub.dim}")
            digits.append(level)
        return tuple(digits)


def _name(item: Union[str, SubsystemLabel]) -> str:
    return item.name if isinstance(item, SubsystemLabel) else str(item)


def space_of(*names: str, cavity_dim: int = None) -> SpaceSpec:
    """
    按标签名构建空间：C* 为腔模，A* 为二能级原子

    Args:
        names: 子系统标签，如 'C1', 'C2', 'A1'
        cavity_dim: 腔模维数（光子数截断 + 1），None 时使用配置默认值

    Returns:
        SpaceSpec
    """
    subs = []
    for n in names:
        if n.upper().startswith("C"):
            subs.append(cavity(n, cavity_dim))
        elif n.upper().startswith("A"):
            subs.append(atom(n))
        else:
            raise ArgumentError(f"无法从标签 {n!r} 推断子系统类型")
    return SpaceSpec(tuple(subs))


@dataclass(frozen=True, eq=False)
class Ket:
    space: SpaceSpec
    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        amps = _frozen(np.asarray(self.amplitudes).reshape(-1))
        if amps.shape[0] != self.space.total_dim:
            raise DimensionError(f"态矢长度 {amps.shape[0]} 与空间维数 {self.space.total_dim} 不符")
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > config.NORM_TOL:
            raise ArgumentError(f"声明归一化但范数为 {np.linalg.norm(amps):.15g}")
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, occupation) -> complex:
        return complex(self.amplitudes[self.space.encode(occupation)])

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    space: SpaceSpec
    elements: np.ndarray

    def __post_init__(self):
        el = _frozen(self.elements)
        d = self.space.total_dim
        if el.shape != (d, d):
            raise DimensionError(f"密度矩阵形状 {el.shape} 与空间维数 {d} 不符")
        object.__setattr__(self, "elements", el)

    def trace(self) -> complex:
        return complex(np.trace(self.elements))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))

    def is_hermitian(self, tol: float = None) -> bool:
        return self.hermiticity_error() <= (config.HERMITIAN_TOL if tol is None else tol)

    def eigenvalues(self) -> np.ndarray:
        # 仅对厄米部分求谱
        return np.linalg.eigvalsh((self.elements + self.elements.conj().T) / 2)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def is_positive(self, tol: float = None) -> bool:
        return self.min_eigenvalue() >= -(config.POSITIVITY_TOL if tol is None else tol)

    def hermitized(self) -> "DensityMatrix":
        return DensityMatrix(self.space, (self.elements + self.elements.conj().T) / 2)

    def renormalized(self) -> "DensityMatrix":
        tr = self.trace().real
        if tr <= 0:
            raise ArgumentError(f"迹为 {tr}，无法归一化")
        return DensityMatrix(self.space, self.elements / tr)

    def validate(self, check_trace: bool = True) -> "DensityMatrix":
        """校验厄米性、正定性与迹，失败抛出 ArgumentError"""
        if not self.is_hermitian():
            raise ArgumentError(f"密度矩阵非厄米，偏差 {self.hermiticity_error():.3e}")
        if not self.is_positive():
            raise ArgumentError(f"密度矩阵非正定，最小本征值 {self.min_eigenvalue():.3e}")
        tr = self.trace()
        if abs(tr.imag) > config.HERMITIAN_TOL:
            raise ArgumentError(f"迹非实数: {tr}")
        if check_trace and abs(tr.real - 1.0) > 1e-9:
            raise ArgumentError(f"迹为 {tr.real:.12g}，不等于 1")
        return self


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    space: SpaceSpec
    elements: np.ndarray

    def __post_init__(self):
        el = _frozen(self.elements)
        d = self.space.total_dim
        if el.ndim != 2 or el.shape != (d, d):
            raise DimensionError(f"算符形状 {el.shape} 与空间维数 {d} 不符")
        object.__setattr__(self, "elements", el)

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.elements.conj().T)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _same_space(self.space, other.space)
        return OperatorMatrix(self.space, self.elements + other.elements)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _same_space(self.space, other.space)
        return OperatorMatrix(self.space, self.elements @ other.elements)

    def scaled(self, factor: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.elements * factor)


def _same_space(a: SpaceSpec, b: SpaceSpec):
    if a != b:
        raise CompositionError(f"空间不一致: {a.names} vs {b.names}")


# ==================== 单体算符 ====================

def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim)).astype(complex)


def sigma_minus() -> np.ndarray:
    # σ₋|e⟩ = |g⟩，g ↦ 0, e ↦ 1
    return np.array([[0, 1], [0, 0]], dtype=complex)


def sigma_plus() -> np.ndarray:
    return sigma_minus().T.copy()


def sigma_y() -> np.ndarray:
    return np.array([[0, -1j], [1j, 0]], dtype=complex)


def single_space(label: SubsystemLabel) -> SpaceSpec:
    return SpaceSpec((label,))


def identity(space: SpaceSpec) -> OperatorMatrix:
    return OperatorMatrix(space, np.eye(space.total_dim))


# ==================== 结构操作 ====================

def basis_ket(space: SpaceSpec, occupation) -> Ket:
    """
    计算基矢 |n₁ n₂ …⟩

    Args:
        space: 复合空间
        occupation: 各子系统能级（元组，或 {标签: 能级}），原子可用 'g'/'e'

    Returns:
        Ket: 混合进制编号处振幅为 1 的单位向量
    """
    vec = np.zeros(space.total_dim, dtype=complex)
    vec[space.encode(occupation)] = 1.0
    return Ket(space, vec, normalized=True)


def superpose(space: SpaceSpec, terms: Sequence[Tuple[complex, object]], normalize: bool = True) -> Ket:
    """按 [(系数, 占据数), …] 叠加基矢"""
    vec = np.zeros(space.total_dim, dtype=complex)
    for coeff, occ in terms:
        vec[space.encode(occ)] += coeff
    if normalize:
        n = np.linalg.norm(vec)
        if n == 0:
            raise ArgumentError("零向量无法归一化")
        vec = vec / n
    return Ket(space, vec, normalized=normalize)


def tensor(a, b):
    """
    张量积（Kronecker 积），结果空间为两个子系统列表按序拼接

    Args:
        a, b: 同为 Ket、DensityMatrix 或 OperatorMatrix

    Returns:
        与输入同类型的对象
    """
    if type(a) is not type(b):
        raise ArgumentError(f"张量积两侧类型不同: {type(a).__name__} ⊗ {type(b).__name__}")
    overlap = set(a.space.names) & set(b.space.names)
    if overlap:
        raise CompositionError(f"张量积标签重复: {sorted(overlap)}")
    space = a.space.concat(b.space)
    if isinstance(a, Ket):
        return Ket(space, np.kron(a.amplitudes, b.amplitudes), normalized=a.normalized and b.normalized)
    if isinstance(a, DensityMatrix):
        return DensityMatrix(space, np.kron(a.elements, b.elements))
    if isinstance(a, OperatorMatrix):
        return OperatorMatrix(space, np.kron(a.elements, b.elements))
    raise ArgumentError(f"不支持的张量积类型: {type(a).__name__}")


def embed(op, space: SpaceSpec, target: Union[str, SubsystemLabel]) -> OperatorMatrix:
    """将单体算符提升到复合空间：目标位置为 op，其余为单位阵"""
    pos = space.index_of(target)
    local = op.elements if isinstance(op, OperatorMatrix) else np.asarray(op, dtype=complex)
    sub = space.subsystems[pos]
    if local.shape != (sub.dim, sub.dim):
        raise DimensionError(f"算符维数 {local.shape} 与子系统 {sub.name} 维数 {sub.dim} 不符")
    factors = [local if i == pos else np.eye(d) for i, d in enumerate(space.dims)]
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return OperatorMatrix(space, out)


def partial_trace(rho: DensityMatrix, keep: Iterable[Union[str, SubsystemLabel]]) -> DensityMatrix:
    """
    对 keep 之外的子系统求迹，结果保持被保留子系统的相对顺序

    Args:
        rho: 复合空间上的密度矩阵
        keep: 保留的子系统标签（非空）

    Returns:
        DensityMatrix: 约化密度矩阵
    """
    keep_names = {_name(k) for k in keep}
    if not keep_names:
        raise ArgumentError("partial_trace 的 keep 不能为空")
    unknown = keep_names - set(rho.space.names)
    if unknown:
        raise ArgumentError(f"partial_trace 未知标签: {sorted(unknown)}")

    dims = list(rho.space.dims)
    n = len(dims)
    kept = [i for i, name in enumerate(rho.space.names) if name in keep_names]
    tensor_form = rho.elements.reshape(dims + dims)
    # 行指标 0..n-1，列指标 n..2n-1；被迹掉的子系统列指标与行指标共用
    row_axes = list(range(n))
    col_axes = [n + i if i in kept else i for i in range(n)]
    out_axes = [i for i in kept] + [n + i for i in kept]
    reduced = np.einsum(tensor_form, row_axes + col_axes, out_axes)
    d = int(np.prod([dims[i] for i in kept]))
    return DensityMatrix(rho.space.subspace(keep_names), reduced.reshape(d, d))


def excitation_number(space: SpaceSpec) -> OperatorMatrix:
    """总激发数 Σ a†a + Σ σ⁺σ⁻"""
    total = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for sub in space.subsystems:
        local = number_operator(sub.dim) if sub.is_cavity else sigma_plus() @ sigma_minus()
        total += embed(local, space, sub).elements
    return OperatorMatrix(space, total)


def expectation(rho: DensityMatrix, op: OperatorMatrix) -> float:
    _same_space(rho.space, op.space)
    return float(np.real(np.trace(rho.elements @ op.elements)))


def population(rho: DensityMatrix, occupation) -> float:
    i = rho.space.encode(occupation)
    return float(np.real(rho.elements[i, i]))


def populations(rho: DensityMatrix) -> Dict[Tuple[int, ...], float]:
    diag = np.real(np.diag(rho.elements))
    return {rho.space.decode(i): float(p) for i, p in enumerate(diag)}
