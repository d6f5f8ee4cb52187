//! Named example states and the values they are known to take.
//!
//! Each [`Example`] bundles a state with a list of [`Expected`] values. The list is what the
//! `examples` command writes to the sidecar file, and the acceptance tests read it back.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::measures::{round12, CutSpec};
use crate::qstate::io::LoadedState;
use crate::qstate::{self, DensityMatrix, DimSpec, Party, PureState};

/// Names accepted by [`example`], in listing order.
pub const NAMES: [&str; 7] = ["trine", "ghz-epr-psi", "ghz-epr-phi", "owmcs", "cc", "epr", "ghz"];

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Stated in the literature for this exact state.
    Published,
    /// Worked out here; `recipe` says how.
    Derived,
    /// Immediate from the definitions.
    Trivial,
}

/// Which file an expected value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// The example state itself.
    State,
    /// The `A,C` marginal of a tripartite pure state.
    Marginal,
}

#[derive(Debug, Clone, Serialize)]
pub struct Expected {
    /// Measure name as accepted by `compute --measure`, or a quantity that is not computed
    /// (`entanglement-cost`, `distillable-entanglement`, `holevo-regularized`).
    pub quantity: String,
    pub value: f64,
    pub cut: String,
    pub target: Target,
    pub provenance: Provenance,
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Example {
    pub name: &'static str,
    pub description: &'static str,
    pub state: LoadedState,
    pub expected: Vec<Expected>,
}

impl Example {
    /// File stem used by the CLI, e.g. `ghz_epr_psi`.
    pub fn stem(&self) -> String {
        self.name.replace('-', "_")
    }

    /// The `A,C` marginal for tripartite pure examples.
    pub fn marginal_ac(&self) -> Result<Option<DensityMatrix>> {
        match &self.state {
            LoadedState::Pure(p) if p.spec().parties().is_some_and(|ps| ps.contains(&Party::C) && ps.contains(&Party::B)) => {
                CutSpec::new(Party::A, Party::C).restrict_pure(p).map(Some)
            }
            _ => Ok(None),
        }
    }

    pub fn get(&self, quantity: &str) -> Option<&Expected> {
        self.expected.iter().find(|e| e.quantity == quantity)
    }

    /// Sidecar document; `files` maps each [`Target`] to the file it was written to.
    pub fn sidecar(&self, state_file: &str, marginal_file: Option<&str>) -> Value {
        let expected: Vec<Value> = self
            .expected
            .iter()
            .map(|e| {
                let mut v = serde_json::to_value(e).expect("expected value serialises");
                v["value"] = json!(round12(e.value));
                v
            })
            .collect();
        let mut files = json!({ "state": state_file });
        if let Some(m) = marginal_file {
            files["marginal"] = json!(m);
        }
        json!({
            "name": self.name,
            "description": self.description,
            "files": files,
            "expected": expected,
        })
    }
}

struct Builder(Vec<Expected>);

impl Builder {
    fn add(mut self, quantity: &str, value: f64, cut: &str, target: Target, provenance: Provenance, note: &str) -> Self {
        self.0.push(Expected {
            quantity: quantity.into(),
            value,
            cut: cut.into(),
            target,
            provenance,
            note: note.into(),
            recipe: None,
        });
        self
    }

    fn recipe(mut self, recipe: &str) -> Self {
        if let Some(last) = self.0.last_mut() {
            last.recipe = Some(recipe.into());
        }
        self
    }
}

fn binary_entropy_of(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

fn owmcs() -> Result<DensityMatrix> {
    let zero = PureState::new(DimSpec::new(vec![2])?, CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]))?;
    let plus = PureState::new(
        DimSpec::new(vec![2])?,
        CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]),
    )?;
    let overlaps = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
    qstate::make_one_way_mcs(&[0.5, 0.5], &[zero, plus], &overlaps)
}

/// Best symmetric correlation of the trine state over projective strategies, from an
/// exhaustive 1-degree grid (see [`crate::verify::projective_grid_optimum`]).
pub const TRINE_PROJECTIVE_OPTIMUM: f64 = 0.459147917027245;

const GRID_RECIPE: &str = "exhaustive 1-degree grid over projective B axes (polar and azimuth), \
    each paired with the best classical post-processing of the computational basis on A; \
    reproduced by verify::projective_grid_optimum(rho, 1.0)";

/// Looks up a named example.
pub fn example(name: &str) -> Result<Example> {
    use Provenance::*;
    use Target::*;
    let ab = "A|B";
    let ab_a = "A|B measured A";
    let ab_b = "A|B measured B";
    let ac_c = "A|C measured C";
    Ok(match name {
        "trine" => {
            let c_opt = 3f64.log2() - 1.0;
            Example {
                name: "trine",
                description: "qutrit-qubit CQ state: uniform classical label on A, three trine states at 120 degrees on B",
                state: LoadedState::Mixed(qstate::make_trine()),
                expected: Builder(Vec::new())
                    .add("mutual-information", 1.0, ab, State, Trivial, "S(rho_B) = 1 and the conditional states are pure")
                    .add("s-min", 1.0, ab, State, Trivial, "S^m equals S(A:B) for CQ states")
                    .add("holevo", 1.0, ab_a, State, Published, "computational basis on the classical side attains S^m")
                    .add("discord", 0.0, ab_a, State, Published, "CQ states have zero discord when the classical side is measured")
                    .add("symmetric-correlation", c_opt, ab, State, Derived, "accessible information of the trine ensemble, attained by the trine POVM on B")
                    .recipe("log2(3) - 1: the three-outcome POVM with effects (2/3)|phi_perp_k><phi_perp_k| excludes one state per outcome")
                    .add("holevo", c_opt, ab_b, State, Derived, "equals the symmetric correlation for a CQ state measured on its quantum side")
                    .recipe("log2(3) - 1, same POVM as the symmetric correlation")
                    .add("projective-symmetric-correlation", TRINE_PROJECTIVE_OPTIMUM, ab, State, Derived, "best projective strategy, strictly below the POVM value")
                    .recipe(GRID_RECIPE)
                    .0,
            }
        }
        "ghz-epr-psi" => Example {
            name: "ghz-epr-psi",
            description: "GHZ on (a1,b1,c1), EPR on (a2,b2), EPR on (a3,c2): seven qubits",
            state: LoadedState::Pure(qstate::make_ghz_epr_psi()),
            expected: Builder(Vec::new())
                .add("s-min", 2.0, ac_c, Marginal, Published, "minimal marginal entropy of rho_AC")
                .add("mutual-information", 3.0, ac_c, Marginal, Published, "S(A) = 3, S(C) = 2, S(AC) = 2")
                .add("holevo", 2.0, ac_c, Marginal, Published, "c1 in the GHZ Schmidt basis, c2 in any basis; pinched by S^m")
                .add("holevo-regularized", 2.0, ac_c, Marginal, Published, "pinched between the single-copy value and S^m")
                .add("irreversibility", 0.0, ac_c, Marginal, Derived, "S^m(rho_AC) minus the regularised one-sided correlation")
                .recipe("2 - 2 from the two published values above")
                .add("irreversibility-discord", 1.0, ac_c, Marginal, Published, "regularised discord S(A:C) - 2 = 1, not tight")
                .add("entanglement-cost", 1.0, ab, State, Published, "one EPR pair converts to rho_AB and back by LOCC")
                .add("distillable-entanglement", 1.0, ab, State, Published, "one EPR pair converts to rho_AB and back by LOCC")
                .0,
        },
        "ghz-epr-phi" => Example {
            name: "ghz-epr-phi",
            description: "as ghz-epr-psi plus an EPR pair on (b3,c3): nine qubits",
            state: LoadedState::Pure(qstate::make_ghz_epr_phi()),
            expected: Builder(Vec::new())
                .add("s-min", 3.0, ac_c, Marginal, Published, "minimal marginal entropy of rho_AC")
                .add("mutual-information", 3.0, ac_c, Marginal, Derived, "S(A) = 3, S(C) = 3, S(AC) = S(B) = 3")
                .recipe("entropies of the product blocks: GHZ marginals, one EPR half per party")
                .add("holevo-regularized", 2.0, ac_c, Marginal, Published, "one bit from the GHZ block plus one from the (a3,c2) EPR pair")
                .add("holevo", 2.0, ac_c, Marginal, Derived, "single-copy value coincides with the regularised one")
                .recipe("the AC marginal factorises into a separable block and a pure block; both are additive")
                .add("irreversibility", 1.0, ac_c, Marginal, Published, "S^m - regularised correlation = 3 - 2, while the true gap is 0")
                .add("irreversibility-discord", 1.0, ac_c, Marginal, Derived, "S(A:C) - 2")
                .recipe("3 - 2 from the values above")
                .add("entanglement-cost", 1.0, ab, State, Published, "reversible: one EPR pair in each direction")
                .add("distillable-entanglement", 1.0, ab, State, Published, "reversible: one EPR pair in each direction")
                .0,
        },
        "owmcs" => {
            let overlap: f64 = 0.5;
            let s_ac = binary_entropy_of(&[(1.0 + overlap) / 2.0, (1.0 - overlap) / 2.0]);
            let s_a = binary_entropy_of(&[(1.0 + FRAC_1_SQRT_2) / 2.0, (1.0 - FRAC_1_SQRT_2) / 2.0]);
            let off = 0.25 * FRAC_1_SQRT_2;
            let s_c = binary_entropy_of(&[0.5 + off, 0.5 - off]);
            let mut state = owmcs()?;
            state = state.with_parties(vec![Party::A, Party::C])?;
            Example {
                name: "owmcs",
                description: "one-way maximally correlated state on A,C with p = (1/2, 1/2), a = (|0>, |+>), <b_1|b_2> = 1/2",
                state: LoadedState::Mixed(state),
                expected: Builder(Vec::new())
                    .add("mutual-information", s_a + s_c - s_ac, "A|C", State, Derived, "S(A) + S(C) - S(AC)")
                    .recipe("S(AC) = h((1 + 1/2)/2) from the purifying B states; S(A) = h((1 + 1/sqrt2)/2); S(C) = h(1/2 + 1/(4 sqrt2))")
                    .add("coherent-information", (s_c - s_ac).max(s_a - s_ac).max(0.0), "A|C", State, Derived, "max{0, S(A) - S(AC), S(C) - S(AC)}")
                    .recipe("from the three entropies above")
                    .0,
            }
        }
        "cc" => Example {
            name: "cc",
            description: "perfectly correlated classical bits (|00><00| + |11><11|)/2",
            state: LoadedState::Mixed(qstate::cc_state()),
            expected: Builder(Vec::new())
                .add("mutual-information", 1.0, ab, State, Trivial, "one shared random bit")
                .add("symmetric-correlation", 1.0, ab, State, Trivial, "computational basis on both sides")
                .add("symmetric-discord", 0.0, ab, State, Trivial, "classical-classical state")
                .add("discord", 0.0, ab_a, State, Trivial, "classical-classical state")
                .add("discord", 0.0, ab_b, State, Trivial, "classical-classical state")
                .add("eof", 0.0, ab, State, Trivial, "separable")
                .0,
        },
        "epr" => Example {
            name: "epr",
            description: "maximally entangled qubit pair (|00> + |11>)/sqrt2",
            state: LoadedState::Pure(qstate::epr()),
            expected: Builder(Vec::new())
                .add("mutual-information", 2.0, ab, State, Trivial, "2 S(rho_A) for a pure state")
                .add("discord", 1.0, ab_a, State, Trivial, "pure state: discord equals S(rho_A)")
                .add("holevo", 1.0, ab_a, State, Trivial, "pure state: S(rho_A)")
                .add("s-min", 1.0, ab, State, Trivial, "min{S(A), S(B)}")
                .add("coherent-information", 1.0, ab, State, Trivial, "S(A) - S(AB)")
                .add("eof", 1.0, ab, State, Trivial, "concurrence 1")
                .0,
        },
        "ghz" => Example {
            name: "ghz",
            description: "three-qubit GHZ state (|000> + |111>)/sqrt2 on A, B, C",
            state: LoadedState::Pure(qstate::ghz()),
            expected: Builder(Vec::new())
                .add("s-min", 1.0, ac_c, Marginal, Trivial, "both marginals are maximally mixed qubits")
                .add("mutual-information", 1.0, ac_c, Marginal, Trivial, "rho_AC is a classically correlated bit")
                .add("holevo", 1.0, ac_c, Marginal, Trivial, "computational basis on C")
                .add("discord", 0.0, ac_c, Marginal, Trivial, "classical-classical marginal")
                .add("irreversibility", 0.0, ac_c, Marginal, Trivial, "rho_AB is separable")
                .0,
        },
        other => {
            return Err(Error::arg(format!("unknown example `{other}`; available: {}", NAMES.join(", "))));
        }
    })
}

/// All examples in [`NAMES`] order.
pub fn all() -> Result<Vec<Example>> {
    NAMES.iter().map(|n| example(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{self, CutSpec};
    use crate::qstate::io::{parse_state, render_state};

    #[test]
    fn every_name_resolves_and_round_trips() {
        for ex in all().unwrap() {
            let text = render_state(&ex.state, Some(ex.name), None);
            let back = parse_state(&text).unwrap().state;
            let diff = match (&back, &ex.state) {
                (LoadedState::Pure(b), LoadedState::Pure(o)) => {
                    (b.amplitudes() - o.amplitudes()).iter().map(|z| z.norm()).fold(0.0, f64::max)
                }
                (LoadedState::Mixed(b), LoadedState::Mixed(o)) => {
                    (b.matrix() - o.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
                }
                _ => panic!("{}: state kind changed", ex.name),
            };
            assert!(diff <= 1e-15, "{}: {diff}", ex.name);
            assert!(!ex.expected.is_empty());
        }
    }

    #[test]
    fn unknown_name_lists_catalogue() {
        let err = example("bell").unwrap_err().to_string();
        assert!(err.contains("ghz-epr-phi") && err.contains("owmcs"));
    }

    #[test]
    fn closed_form_values_match() {
        for ex in all().unwrap() {
            let marginal = ex.marginal_ac().unwrap();
            for e in &ex.expected {
                if !matches!(
                    e.quantity.as_str(),
                    "mutual-information" | "s-min" | "coherent-information"
                ) {
                    continue;
                }
                let rho = match e.target {
                    Target::State => ex.state.density().unwrap(),
                    Target::Marginal => marginal.clone().unwrap(),
                };
                let (first, second) = if e.cut.starts_with("A|C") { (Party::A, Party::C) } else { (Party::A, Party::B) };
                let cut = CutSpec::new(first, second);
                let got = match e.quantity.as_str() {
                    "mutual-information" => measures::mutual_information(&rho, &cut).unwrap().value,
                    "s-min" => measures::s_min(&rho, &cut).unwrap().value,
                    "coherent-information" => measures::coherent_information(&rho, &cut).unwrap().value,
                    _ => continue,
                };
                assert!((got - e.value).abs() < 1e-9, "{} {}: {got} vs {}", ex.name, e.quantity, e.value);
            }
        }
    }

    #[test]
    fn sidecar_marks_trine_grid_value_derived() {
        let ex = example("trine").unwrap();
        let side = ex.sidecar("trine.json", None);
        let rows = side["expected"].as_array().unwrap();
        let proj = rows.iter().find(|r| r["quantity"] == "projective-symmetric-correlation").unwrap();
        assert_eq!(proj["provenance"], "derived");
        assert!(proj["recipe"].as_str().unwrap().contains("grid"));
        let phi = example("ghz-epr-phi").unwrap();
        assert_eq!(phi.get("s-min").unwrap().value, 3.0);
        assert_eq!(phi.get("holevo-regularized").unwrap().value, 2.0);
        assert_eq!(phi.get("entanglement-cost").unwrap().value, 1.0);
        assert!(phi.marginal_ac().unwrap().is_some());
    }
}
