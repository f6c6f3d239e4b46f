"""SSA mini-IR: representation, parser, interpreter and reachability oracle."""

from .interp import (BfsResult, ConcreteState, Outcome, bfs_reachable_error, execute_block,
                     initial_state, interpret, signed_overflows, successor)
from .ir import (Block, BinOp, Br, Call, CondBr, Const, Ext, ICmp, Phi, Program, Reg, Ret,
                 Select, Unreachable, format_program)
from .parser import ParseError, UnsupportedInstruction, dominators, parse

__all__ = [
    "BfsResult", "BinOp", "Block", "Br", "Call", "ConcreteState", "CondBr", "Const", "Ext",
    "ICmp", "Outcome", "ParseError", "Phi", "Program", "Reg", "Ret", "Select", "Unreachable",
    "UnsupportedInstruction", "bfs_reachable_error", "dominators", "execute_block",
    "format_program", "initial_state", "interpret", "parse", "signed_overflows", "successor",
]
