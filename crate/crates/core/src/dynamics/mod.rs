//! One-parameter groups of jet-space fields: characteristic systems, RK4
//! integration, closed-form example flows, and verification of flows,
//! invariants and commuting generators.

mod commute;
mod flow;
mod invariants;

pub use commute::commuting_flows_check;
pub use flow::{
    characteristic_system, closed_form_flow, convergence_factor, cross_check_numeric, flow_cross_check,
    group_law_numeric, integrate_flow, CharacteristicSystem, FlowCheck, FlowError, FlowMap, FlowSource, FlowVariant,
    NumericOptions,
};
pub use invariants::{
    invariant_catalog, verify_invariant, verify_invariants, Catalog, CatalogQuery, Invariant, InvariantSource,
    Trajectories, K_ALPHA_NOTE,
};
