//! Verilog-2001 subset front end.

pub mod assets;
pub mod ast;
pub mod clocking;
pub mod consteval;
pub mod design;
pub mod fsm;
pub mod parser;
pub mod print;
pub mod regs;

pub use assets::{leak_targets, sensitive_signals, DEFAULT_SENSITIVE_PATTERNS};
pub use clocking::{Polarity, ResetInfo, ResetKind};
pub use design::{parse_design, Constant, DesignError, DesignModel, ModuleInfo, PortInfo, SignalInfo, SignalKind};
pub use fsm::{unused_states, FsmInfo, StateDef, Transition, WidthTooLarge};
pub use parser::{parse_expression, parse_source, SyntaxError};
pub use regs::{uninitialized_registers, RegInfo};
