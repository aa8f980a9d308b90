//! Exhaustive walk of the eavesdropper branching tree.
//!
//! Every split is an even coin: Eve measures the same variable as Alice or
//! the other one; on the other one her outcome lands one unit above or
//! below, and Bob's subsequent outcome lands one unit above or below hers.
//! Values are expressed in Alice's frame (Bob's key is his negated result).

use num_rational::Rational64;

use super::joint::ExactJoint;
use super::{check_l0, AnalyticsError};
use crate::angmom::Observable;
use crate::key::KeySymbol;

/// Alice's values for a variable together with their conditional weights:
/// OAM is uniform over `-l0..=l0`; TAM puts weight 2 on each key-capable `j`
/// and weight 1 on each of `±(l0+1)`.
pub fn alice_values(l0: u32, variable: Observable) -> Vec<(i32, Rational64)> {
    let l0i = l0 as i32;
    match variable {
        Observable::Oam => {
            let w = Rational64::new(1, 2 * l0i as i64 + 1);
            (-l0i..=l0i).map(|l| (l, w)).collect()
        }
        Observable::Tam => {
            let unit = Rational64::new(1, 4 * l0i as i64 + 4);
            (-l0i - 1..=l0i + 1)
                .map(|j| (j, if j.abs() > l0i { unit } else { unit * 2 }))
                .collect()
        }
    }
}

/// Alice × Bob key-symbol table conditional on `variable` and on Eve
/// intercepting.
pub fn enumerate_fig5(l0: u32, variable: Observable) -> Result<ExactJoint, AnalyticsError> {
    check_l0(l0)?;
    let half = Rational64::new(1, 2);
    let mut table = ExactJoint::zeros(l0);
    for (a, w) in alice_values(l0, variable) {
        let alice = KeySymbol::from_measured(a, l0);
        // Eve on the same variable: no disturbance.
        table.add(alice, KeySymbol::from_measured(a, l0), w * half);
        // Eve on the other variable: two further even splits.
        for eve_step in [-1, 1] {
            for bob_step in [-1, 1] {
                let bob = KeySymbol::from_measured(a + eve_step + bob_step, l0);
                table.add(alice, bob, w * half * half * half);
            }
        }
    }
    Ok(table)
}

/// Variable-choice weights after biasing: `P(OAM) = (2l0+1)/(4l0+3)`,
/// `P(TAM) = (2l0+2)/(4l0+3)`.
pub fn variable_weights(l0: u32) -> (Rational64, Rational64) {
    let d = 4 * l0 as i64 + 3;
    (
        Rational64::new(2 * l0 as i64 + 1, d),
        Rational64::new(2 * l0 as i64 + 2, d),
    )
}

/// OAM and TAM branch tables mixed by [`variable_weights`].
pub fn fig5_mixture(l0: u32) -> Result<ExactJoint, AnalyticsError> {
    let (w_oam, w_tam) = variable_weights(l0);
    Ok(enumerate_fig5(l0, Observable::Oam)?.combine(
        w_oam,
        &enumerate_fig5(l0, Observable::Tam)?,
        w_tam,
    ))
}
