//! Program construction: active variables, internal scaling, and the
//! direct (non-epigraph) objective evaluation.

use crate::allocator::optimal_allocation;
use crate::error::{Error, Result};
use crate::model::{Scenario, Selection};

/// Extra linear objective piece `sum c_{k,v} y_{k,v} + constant`, used by
/// the penalized iterations; absent for the plain relaxation.
#[derive(Debug, Clone)]
pub struct LinearYTerm {
    /// Dense K x n coefficients, row-major, joules per unit utilization.
    pub coeffs: Vec<f64>,
    /// Constant offset in joules.
    pub constant: f64,
}

/// Reference to a utilization value: a free variable column or a value
/// pinned by the constraint structure.
#[derive(Debug, Clone, Copy)]
pub(crate) enum YRef {
    Var(usize),
    One,
}

/// One (user, view) utilization entering the view's airtime max.
#[derive(Debug, Clone)]
pub(crate) struct PairTerm {
    pub user: usize,
    /// Scaled coefficient of the perspective term for this user.
    pub a: f64,
    pub y: YRef,
}

/// A view with at least one potential utilizer; carries its own variable
/// block `[t, e, z?, y...]`.
#[derive(Debug, Clone)]
pub(crate) struct ActiveView {
    pub view_index: usize,
    pub t_col: usize,
    pub e_col: usize,
    pub z_col: Option<usize>,
    pub pairs: Vec<PairTerm>,
    pub block_size: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct YVarInfo {
    pub user: usize,
    pub view_index: usize,
    pub col: usize,
    /// Scaled objective coefficient (weighted user synthesis plus any
    /// linear term).
    pub obj: f64,
}

/// One coverage equality: the listed columns sum to one.
#[derive(Debug, Clone)]
pub(crate) struct EqualityRow {
    pub cols: Vec<usize>,
}

/// The assembled program. Internally everything is scaled: times are
/// fractions of the frame and energies are multiples of `energy_scale_j`,
/// which keeps the Newton systems well conditioned across the huge
/// dynamic range between airtime and synthesis energies.
#[derive(Debug, Clone)]
pub struct ConvexViewProgram {
    pub(crate) n_vars: usize,
    pub(crate) n_views: usize,
    pub(crate) users: usize,
    pub(crate) views: Vec<ActiveView>,
    pub(crate) y_vars: Vec<YVarInfo>,
    pub(crate) equalities: Vec<EqualityRow>,
    /// Users whose empty reference window forces direct service:
    /// (user, request view index).
    pub(crate) fixed_direct: Vec<(usize, usize)>,
    /// Server synthesis energy, scaled; zero disables the z variables.
    pub(crate) server_synth: f64,
    pub(crate) constant: f64,
    /// Exponent coefficient R/B: the rate term is `2^(gamma y / t')`.
    pub(crate) gamma: f64,
    pub(crate) energy_scale_j: f64,
    pub(crate) frame_s: f64,
    pub(crate) m_ineq: usize,
    /// Lower bound on scaled times inside the barrier.
    pub(crate) t_floor: f64,
}

impl ConvexViewProgram {
    pub fn variable_count(&self) -> usize {
        self.n_vars
    }

    pub fn active_view_count(&self) -> usize {
        self.views.len()
    }

    pub fn utilization_variable_count(&self) -> usize {
        self.y_vars.len()
    }

    pub fn epigraph_variable_count(&self) -> usize {
        self.views.len()
    }

    pub fn peak_variable_count(&self) -> usize {
        self.views.iter().filter(|v| v.z_col.is_some()).count()
    }

    /// Scaled objective at a full variable vector.
    pub(crate) fn objective_scaled(&self, theta: &[f64]) -> f64 {
        let mut f = self.constant;
        for view in &self.views {
            f += theta[view.e_col];
            if let Some(z) = view.z_col {
                f += self.server_synth * theta[z];
            }
        }
        for y in &self.y_vars {
            f += y.obj * theta[y.col];
        }
        f
    }
}

/// Build the program for a scenario. Without a linear term it is the
/// continuous relaxation; with penalty-linearization coefficients it is
/// one penalized iteration.
pub fn build_program(scenario: &Scenario, linear: Option<&LinearYTerm>) -> Result<ConvexViewProgram> {
    scenario.validate()?;
    let grid = &scenario.grid;
    let n = grid.len();
    let users = scenario.user_count();
    if let Some(term) = linear {
        if term.coeffs.len() != users * n {
            return Err(Error::InvalidParameter {
                field: "linear_y_term",
                message: format!("{} coefficients for {} entries", term.coeffs.len(), users * n),
            });
        }
    }

    // Scale energies by the dominant cost so the barrier works on O(1)
    // numbers: the all-direct airtime energy is always available as a
    // reference point.
    let (_, direct_airtime, _) = optimal_allocation(scenario, &Selection::all_direct(scenario))?;
    let max_user = scenario
        .user_synth_j
        .iter()
        .fold(0.0f64, |m, &e| m.max(scenario.beta * e));
    let energy_scale_j = scenario
        .server_synth_j
        .max(max_user)
        .max(direct_airtime)
        .max(1e-30);

    let mut fixed_direct = Vec::new();
    let mut supports: Vec<Option<Vec<usize>>> = Vec::with_capacity(users);
    for (k, &r) in scenario.requests.iter().enumerate() {
        let left = grid.left_window(r);
        let right = grid.right_window(r);
        if left.is_empty() || right.is_empty() {
            // Coverage forces direct service; the user leaves the program.
            fixed_direct.push((k, grid.index_of(r)));
            supports.push(None);
        } else {
            let mut sup: Vec<usize> = left.chain(std::iter::once(grid.index_of(r))).chain(right).collect();
            sup.sort_unstable();
            supports.push(Some(sup));
        }
    }

    // Pair lists per view.
    let mut pairs_at: Vec<Vec<(usize, YRef)>> = vec![Vec::new(); n];
    for (k, sup) in supports.iter().enumerate() {
        if let Some(sup) = sup {
            for &v in sup {
                pairs_at[v].push((k, YRef::Var(usize::MAX)));
            }
        }
    }
    for &(k, v) in &fixed_direct {
        pairs_at[v].push((k, YRef::One));
    }

    let mut constant = linear.map_or(0.0, |t| t.constant) / energy_scale_j;
    let gamma = scenario.rate_bps / scenario.bandwidth_hz;
    let phi_scale = scenario.frame_s / energy_scale_j;
    let server_synth = scenario.server_synth_j / energy_scale_j;

    let mut views = Vec::new();
    let mut y_vars: Vec<YVarInfo> = Vec::new();
    let mut y_col: Vec<Vec<Option<usize>>> = vec![vec![None; n]; users];
    let mut col = 0usize;
    let mut m_ineq = 1; // frame budget
    for v in 0..n {
        if pairs_at[v].is_empty() {
            continue;
        }
        let t_col = col;
        let e_col = col + 1;
        col += 2;
        let all_var = pairs_at[v].iter().all(|(_, y)| matches!(y, YRef::Var(_)));
        let want_z = server_synth > 0.0 && !grid.is_original(grid.view_at(v));
        let z_col = if want_z && all_var {
            col += 1;
            Some(col - 1)
        } else {
            if want_z {
                // A pinned utilizer keeps the peak at one.
                constant += server_synth;
            }
            None
        };
        let mut pairs = Vec::with_capacity(pairs_at[v].len());
        for &(k, yref) in &pairs_at[v] {
            let a = scenario.noise_w / scenario.channels[k] * phi_scale;
            let y = match yref {
                YRef::One => YRef::One,
                YRef::Var(_) => {
                    let c = col;
                    col += 1;
                    y_col[k][v] = Some(c);
                    let mut obj = 0.0;
                    if grid.right_window(scenario.requests[k]).contains(&v) {
                        obj += scenario.beta * scenario.user_synth_j[k] / energy_scale_j;
                    }
                    if let Some(term) = linear {
                        obj += term.coeffs[k * n + v] / energy_scale_j;
                    }
                    y_vars.push(YVarInfo { user: k, view_index: v, col: c, obj });
                    m_ineq += 2; // box constraints
                    YRef::Var(c)
                }
            };
            m_ineq += 1; // perspective epigraph
            if z_col.is_some() {
                m_ineq += 1; // peak epigraph
            }
            pairs.push(PairTerm { user: k, a, y });
        }
        m_ineq += 1; // time floor
        views.push(ActiveView {
            view_index: v,
            t_col,
            e_col,
            z_col,
            pairs,
            block_size: col - t_col,
        });
    }

    // Linear coefficients on pinned entries only shift the constant.
    if let Some(term) = linear {
        for &(k, v) in &fixed_direct {
            constant += term.coeffs[k * n + v] / energy_scale_j;
        }
    }

    let mut equalities = Vec::new();
    for (k, sup) in supports.iter().enumerate() {
        if sup.is_none() {
            continue;
        }
        let r = scenario.requests[k];
        let ri = grid.index_of(r);
        let own = y_col[k][ri].expect("request column exists");
        let mut right_cols = vec![own];
        right_cols.extend(grid.right_window(r).map(|v| y_col[k][v].expect("window column")));
        equalities.push(EqualityRow { cols: right_cols });
        let mut left_cols = vec![own];
        left_cols.extend(grid.left_window(r).map(|v| y_col[k][v].expect("window column")));
        equalities.push(EqualityRow { cols: left_cols });
    }

    Ok(ConvexViewProgram {
        n_vars: col,
        n_views: n,
        users,
        views,
        y_vars,
        equalities,
        fixed_direct,
        server_synth,
        constant,
        gamma,
        energy_scale_j,
        frame_s: scenario.frame_s,
        m_ineq,
        t_floor: 1e-12,
    })
}

/// Direct evaluation of the relaxed objective at a (time, utilization)
/// point, in joules: airtime maxima plus server-synthesis peaks plus
/// weighted user synthesis. The perspective terms take their continuous
/// extension at `t = 0` — zero when the view is unused, infinite when a
/// positive utilization gets no airtime.
pub fn perspective_objective(time_s: &[f64], utilization: &[f64], scenario: &Scenario) -> f64 {
    let grid = &scenario.grid;
    let n = grid.len();
    let users = scenario.user_count();
    debug_assert_eq!(time_s.len(), n);
    debug_assert_eq!(utilization.len(), users * n);

    let mut total = 0.0;
    for v in 0..n {
        total += airtime_term(scenario, time_s[v], (0..users).map(|k| (k, utilization[k * n + v])));
        if !grid.is_original(grid.view_at(v)) {
            let peak = (0..users).fold(0.0f64, |m, k| m.max(utilization[k * n + v]));
            total += scenario.server_synth_j * peak;
        }
    }
    for (k, &r) in scenario.requests.iter().enumerate() {
        let synth: f64 = grid.right_window(r).map(|v| utilization[k * n + v]).sum();
        total += scenario.beta * scenario.user_synth_j[k] * synth;
    }
    total
}

/// One view's airtime energy `t * max_k (n0/h_k)(2^(y R T/(B t)) - 1)`
/// with the continuous extension at `t = 0`.
pub(crate) fn airtime_term(
    scenario: &Scenario,
    t: f64,
    utilization: impl Iterator<Item = (usize, f64)>,
) -> f64 {
    let gamma_t = scenario.rate_bps * scenario.frame_s / scenario.bandwidth_hz;
    let mut peak = 0.0f64;
    let mut any_positive = false;
    for (k, y) in utilization {
        if y > 0.0 {
            any_positive = true;
        }
        if t > 0.0 {
            let term = scenario.noise_w / scenario.channels[k] * ((gamma_t * y / t).exp2() - 1.0);
            peak = peak.max(term);
        }
    }
    if t > 0.0 {
        t * peak
    } else if any_positive {
        f64::INFINITY
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_support::scenario;

    #[test]
    fn active_variable_counts_for_single_user() {
        let s = scenario(2, 2, 1.0, &[1.5], 1e-3);
        let p = build_program(&s, None).unwrap();
        // Utilization variables at views 1, 1.5 and 2; one epigraph per
        // view; one peak variable for the synthesized view.
        assert_eq!(p.utilization_variable_count(), 3);
        assert_eq!(p.epigraph_variable_count(), 3);
        assert_eq!(p.peak_variable_count(), 1);
        assert_eq!(p.equalities.len(), 2);
        assert!(p.fixed_direct.is_empty());
    }

    #[test]
    fn boundary_request_is_pinned() {
        let s = scenario(2, 2, 1.0, &[1.0], 1e-3);
        let p = build_program(&s, None).unwrap();
        assert_eq!(p.utilization_variable_count(), 0);
        assert_eq!(p.fixed_direct, vec![(0, 0)]);
        assert_eq!(p.epigraph_variable_count(), 1);
        assert!(p.equalities.is_empty());
    }

    #[test]
    fn zero_linear_term_changes_nothing() {
        let s = scenario(3, 2, 1.0, &[1.5, 2.5], 1e-3);
        let n = s.grid.len();
        let zero = LinearYTerm { coeffs: vec![0.0; 2 * n], constant: 0.0 };
        let plain = build_program(&s, None).unwrap();
        let with = build_program(&s, Some(&zero)).unwrap();
        assert_eq!(plain.constant, with.constant);
        for (a, b) in plain.y_vars.iter().zip(&with.y_vars) {
            assert_eq!(a.obj, b.obj);
        }
    }

    #[test]
    fn direct_service_kills_user_synthesis_term() {
        let s = scenario(3, 2, 1.0, &[2.0, 3.0], 1e-3);
        let n = s.grid.len();
        let mut y = vec![0.0; 2 * n];
        y[s.grid.index_of(s.requests[0])] = 1.0;
        y[n + s.grid.index_of(s.requests[1])] = 1.0;
        let mut t = vec![0.0; n];
        t[s.grid.index_of(s.requests[0])] = 0.05;
        t[s.grid.index_of(s.requests[1])] = 0.05;
        let value = perspective_objective(&t, &y, &s);
        // Both requests are original and served directly: airtime only.
        let airtime: f64 = (0..n)
            .map(|v| airtime_term(&s, t[v], (0..2).map(|k| (k, y[k * n + v]))))
            .sum();
        assert_eq!(value, airtime);
    }

    #[test]
    fn unused_view_contributes_nothing_and_starved_view_blows_up() {
        let s = scenario(3, 2, 1.0, &[2.0], 1e-3);
        let n = s.grid.len();
        let mut y = vec![0.0; n];
        let i2 = s.grid.index_of(s.requests[0]);
        y[i2] = 1.0;
        let mut t = vec![0.0; n];
        t[i2] = 0.1;
        // Idle views with time contribute zero airtime.
        t[0] = 0.01;
        assert!(perspective_objective(&t, &y, &s).is_finite());
        // Positive utilization with zero time is infeasible in the limit.
        t[i2] = 0.0;
        assert_eq!(perspective_objective(&t, &y, &s), f64::INFINITY);
    }

    #[test]
    fn longer_frames_cost_more_at_fixed_point() {
        let s = scenario(3, 2, 1.0, &[2.5], 1e-3);
        let n = s.grid.len();
        let mut y = vec![0.0; n];
        y[s.grid.index_of(s.grid.view_from_value(2.0).unwrap())] = 1.0;
        y[s.grid.index_of(s.grid.view_from_value(3.0).unwrap())] = 1.0;
        let t = vec![0.02; n];
        let base = perspective_objective(&t, &y, &s);
        let mut longer = s.clone();
        longer.frame_s *= 2.0;
        assert!(perspective_objective(&t, &y, &longer) > base);
    }
}
