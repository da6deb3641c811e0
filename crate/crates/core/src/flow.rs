//! Linearized radial power-flow block: per (hour, scenario) it contributes
//! line-flow variables, loss coupling, current/voltage windows, and the
//! piecewise-linear sandwich tying V to V^2 and I to I^2.
//!
//! Units are kV / kA / ohm / MW throughout, which keeps every row
//! dimensionally consistent without per-unit scaling (ohm * kA^2 = MW,
//! kV / ohm = kA).

use crate::error::CoreError;
use crate::milp::{ColId, MilpModel, RowId, Sense};
use crate::model::NetworkModel;
use crate::pwl::PwlApprox;

/// Column handles for one line in one (t, s) block.
#[derive(Debug, Clone, Copy)]
pub struct LineVars {
    /// Active power entering at the from end (MW, free sign).
    pub p_fm: ColId,
    /// Active power entering at the to end (MW, free sign).
    pub p_to: ColId,
    /// Signed current (kA), bounded by the thermal limit.
    pub current: ColId,
    /// Current square (kA^2), PWL-sandwiched against `current`.
    pub current_sq: ColId,
    /// Resistive loss (MW), equal to p_fm + p_to.
    pub loss: ColId,
}

/// All flow columns of one (t, s) block, parallel to the network's line and
/// bus vectors.
#[derive(Debug, Clone)]
pub struct FlowBlock {
    pub t: usize,
    pub s: usize,
    pub lines: Vec<LineVars>,
    /// Voltage magnitude per bus (kV).
    pub v: Vec<ColId>,
    /// Voltage square per bus (kV^2), PWL-sandwiched against `v`.
    pub v_sq: Vec<ColId>,
}

/// Adds the flow columns and every line/PWL row for one (t, s) block.
///
/// Emitted per line: the flow-loss identity `p_fm + p_to = R * I^2`, the
/// voltage-drop form `p_fm - p_to = R (V_i^2 - V_h^2) / Z^2` (skipped on
/// lossless lines, where it would force the flow itself to zero), the linear
/// current law `Z I = V_i - V_h`, the loss definition, and the current
/// sandwich. Per bus: the voltage sandwich. Bus balance rows are emitted
/// separately by [`emit_bus_balance`] once the injection columns exist.
pub fn emit_flow_block(
    model: &mut MilpModel,
    net: &NetworkModel,
    t: usize,
    s: usize,
    pwl_segments: usize,
) -> Result<FlowBlock, CoreError> {
    let tag = |stem: &str| format!("{stem}_t{t}_s{s}");

    let mut v = Vec::with_capacity(net.buses.len());
    let mut v_sq = Vec::with_capacity(net.buses.len());
    for b in &net.buses {
        if b.v_min > b.v_max {
            return Err(CoreError::Model(format!(
                "bus {}: voltage window [{}, {}] is inverted",
                b.id, b.v_min, b.v_max
            )));
        }
        v.push(model.add_col(tag(&format!("v_{}", b.id)), b.v_min, b.v_max, 0.0));
        v_sq.push(model.add_col(
            tag(&format!("vsq_{}", b.id)),
            b.v_min * b.v_min,
            b.v_max * b.v_max,
            0.0,
        ));
    }

    let mut lines = Vec::with_capacity(net.lines.len());
    for l in &net.lines {
        if l.impedance_z <= 0.0 {
            return Err(CoreError::Model(format!(
                "line {}-{}: impedance must be positive",
                l.from, l.to
            )));
        }
        let stem = format!("{}_{}", l.from, l.to);
        lines.push(LineVars {
            p_fm: model.add_col(tag(&format!("pfm_{stem}")), f64::NEG_INFINITY, f64::INFINITY, 0.0),
            p_to: model.add_col(tag(&format!("pto_{stem}")), f64::NEG_INFINITY, f64::INFINITY, 0.0),
            current: model.add_col(tag(&format!("i_{stem}")), -l.current_max, l.current_max, 0.0),
            current_sq: model.add_col(
                tag(&format!("isq_{stem}")),
                0.0,
                l.current_max * l.current_max,
                0.0,
            ),
            loss: model.add_col(tag(&format!("loss_{stem}")), 0.0, f64::INFINITY, 0.0),
        });
    }

    for (l, lv) in net.lines.iter().zip(&lines) {
        let stem = format!("{}_{}", l.from, l.to);
        let fi = net.bus_index(l.from).expect("validated");
        let hi = net.bus_index(l.to).expect("validated");

        model.add_row(
            tag(&format!("flowloss_{stem}")),
            Sense::Eq,
            0.0,
            &[
                (lv.p_fm, 1.0),
                (lv.p_to, 1.0),
                (lv.current_sq, -l.resistance_r),
            ],
        );
        if l.resistance_r > 0.0 {
            let k = l.resistance_r / (l.impedance_z * l.impedance_z);
            model.add_row(
                tag(&format!("vdrop_{stem}")),
                Sense::Eq,
                0.0,
                &[
                    (lv.p_fm, 1.0),
                    (lv.p_to, -1.0),
                    (v_sq[fi], -k),
                    (v_sq[hi], k),
                ],
            );
        }
        model.add_row(
            tag(&format!("ohm_{stem}")),
            Sense::Eq,
            0.0,
            &[(lv.current, l.impedance_z), (v[fi], -1.0), (v[hi], 1.0)],
        );
        model.add_row(
            tag(&format!("lossdef_{stem}")),
            Sense::Eq,
            0.0,
            &[(lv.loss, 1.0), (lv.p_fm, -1.0), (lv.p_to, -1.0)],
        );

        let pwl = PwlApprox::square(-l.current_max, l.current_max, pwl_segments)?;
        emit_square_sandwich(model, &tag(&format!("ipwl_{stem}")), lv.current, lv.current_sq, &pwl);
    }

    for (b, (&vc, &vs)) in net.buses.iter().zip(v.iter().zip(&v_sq)) {
        if b.v_max > b.v_min {
            let pwl = PwlApprox::square(b.v_min, b.v_max, pwl_segments)?;
            emit_square_sandwich(model, &tag(&format!("vpwl_{}", b.id)), vc, vs, &pwl);
        } else {
            // Degenerate window: V is fixed, pin the square directly.
            model.add_row(
                tag(&format!("vpwl_{}_fix", b.id)),
                Sense::Eq,
                b.v_min * b.v_min,
                &[(vs, 1.0)],
            );
        }
    }

    Ok(FlowBlock { t, s, lines, v, v_sq })
}

/// Tangent lower envelope plus secant cap tying `y` to `x^2`.
fn emit_square_sandwich(
    model: &mut MilpModel,
    stem: &str,
    x: ColId,
    y: ColId,
    pwl: &PwlApprox,
) {
    for (k, (cx, cy, rhs)) in pwl.tangent_rows().into_iter().enumerate() {
        model.add_row(
            format!("{stem}_tan{k}"),
            Sense::Ge,
            rhs,
            &[(x, cx), (y, cy)],
        );
    }
    let (cx, cy, rhs) = pwl.secant_row();
    model.add_row(format!("{stem}_sec"), Sense::Le, rhs, &[(x, cx), (y, cy)]);
}

impl FlowBlock {
    /// Flow-side terms of a bus-balance row: for every line incident to the
    /// bus, 0.5 * (sign * (p_fm - p_to) + loss) with sign +1 at the from end
    /// and -1 at the to end. (At the from end this telescopes to exactly
    /// p_fm; at the to end to -p_to.)
    pub fn balance_terms(&self, net: &NetworkModel, bus_id: usize) -> Vec<(ColId, f64)> {
        let mut terms = Vec::new();
        for (l, lv) in net.lines.iter().zip(&self.lines) {
            let sign = if l.from == bus_id {
                1.0
            } else if l.to == bus_id {
                -1.0
            } else {
                continue;
            };
            terms.push((lv.p_fm, 0.5 * sign));
            terms.push((lv.p_to, -0.5 * sign));
            terms.push((lv.loss, 0.5));
        }
        terms
    }
}

/// Bus power balance: sum of injection terms minus the flow side equals the
/// bus load. `injections` carries (column, coefficient) for WEM purchase,
/// Disco DG/PV, interruptible load, and microgrid exchange at this bus.
pub fn emit_bus_balance(
    model: &mut MilpModel,
    net: &NetworkModel,
    block: &FlowBlock,
    bus_id: usize,
    injections: &[(ColId, f64)],
    load: f64,
) -> RowId {
    let mut coeffs: Vec<(ColId, f64)> = injections.to_vec();
    for (col, c) in block.balance_terms(net, bus_id) {
        coeffs.push((col, -c));
    }
    model.add_row(
        format!("bal_{bus_id}_t{}_s{}", block.t, block.s),
        Sense::Eq,
        load,
        &coeffs,
    )
}
