"""blockenc: composable block encodings with circuit lowering and verification."""

from .circuits import Circuit, Gate, UnsupportedGateError, export_text, t_count_estimate
from .composites import (
    Add,
    Adjoint,
    BlockDiagonal,
    Product,
    Scale,
    Tensor,
    ZeroMatrix,
    scale,
)
from .nodes import (
    Budget,
    BudgetExceededError,
    EncodingView,
    Node,
    ProxyNode,
    ResourceReport,
    VerifyReport,
    get_budget,
    set_budget,
)
from .primitives import (
    ConstantIntegerAddition,
    ConstantVector,
    Identity,
    Increment,
    IntegerAddition,
    Permutation,
    Projection,
    QFT,
)
from .qsvt import (
    PhaseSolverError,
    PhaseVector,
    Pseudoinverse,
    SingularValueTransform,
    TargetPolynomial,
    realized_poly,
    solve_phases,
)
from .subspaces import (
    Controlled,
    Subspace,
    SubspaceFormatError,
    SubspaceShapeError,
    TruncationUnsupportedError,
    ZeroQubit,
)


def verify(node: Node, tol: float = 1e-10) -> VerifyReport:
    """Compare a node's circuit path against its arithmetic path on the basis."""
    return node.verify(tol)


__all__ = [
    "Add", "Adjoint", "BlockDiagonal", "Budget", "BudgetExceededError", "Circuit",
    "ConstantIntegerAddition", "ConstantVector", "Controlled", "EncodingView", "Gate",
    "Identity", "Increment", "IntegerAddition", "Node", "Permutation", "PhaseSolverError",
    "PhaseVector", "Product", "Projection", "ProxyNode", "Pseudoinverse", "QFT",
    "ResourceReport", "Scale", "SingularValueTransform", "Subspace", "SubspaceFormatError",
    "SubspaceShapeError", "Tensor", "TargetPolynomial", "TruncationUnsupportedError",
    "UnsupportedGateError", "VerifyReport", "ZeroMatrix", "ZeroQubit", "export_text",
    "get_budget", "realized_poly", "scale", "set_budget", "solve_phases",
    "t_count_estimate", "verify",
]
