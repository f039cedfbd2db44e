use std::fmt;

use rand::Rng;

use super::structure::ExpectedUtilityStructure;
use super::value::Value;

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    pub cases: usize,
    /// First failing tuple, in the order the axiom names its operands.
    pub counterexample: Option<Vec<Value>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub structure: String,
    pub exhaustive: bool,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = if self.exhaustive { "exhaustive" } else { "sampled" };
        writeln!(f, "{} ({mode})", self.structure)?;
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "  {status} {} [{} cases]", c.axiom, c.cases)?;
            if let Some(cx) = &c.counterexample {
                let items: Vec<String> = cx.iter().map(|v| v.to_string()).collect();
                write!(f, " counterexample ({})", items.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Checker {
    checks: Vec<AxiomCheck>,
}

impl Checker {
    fn run<'a>(&mut self, axiom: &str, cases: &'a [Vec<Value>], pred: impl Fn(&'a [Value]) -> bool) {
        let counterexample = cases.iter().find(|c| !pred(c)).cloned();
        self.checks.push(AxiomCheck {
            axiom: axiom.to_string(),
            passed: counterexample.is_none(),
            cases: cases.len(),
            counterexample,
        });
    }
}

fn tuples(elements: &[Vec<Value>]) -> Vec<Vec<Value>> {
    elements.iter().fold(vec![Vec::new()], |acc, dom| {
        acc.into_iter()
            .flat_map(|prefix| {
                dom.iter().map(move |v| {
                    let mut t = prefix.clone();
                    t.push(v.clone());
                    t
                })
            })
            .collect()
    })
}

/// Checks the semiring, monoid, semimodule and monotonicity axioms, plus
/// the Ax1/Ax2 identities the structure claims.
///
/// When both carriers are finite every tuple is enumerated and `sampler`
/// is not used; otherwise `n_samples` tuples are drawn per family.
pub fn check_axioms<R: Rng + ?Sized>(s: &ExpectedUtilityStructure, sampler: &mut R, n_samples: usize) -> AxiomReport {
    let pe = s.plaus.carrier.elements();
    let ue = s.util.carrier.elements();
    let exhaustive = pe.is_some() && ue.is_some();

    let mut draw = |p_slots: usize, u_slots: usize| -> Vec<Vec<Value>> {
        if let (Some(pe), Some(ue)) = (&pe, &ue) {
            let mut doms = vec![pe.clone(); p_slots];
            doms.extend(std::iter::repeat_n(ue.clone(), u_slots));
            return tuples(&doms);
        }
        (0..n_samples)
            .map(|_| {
                let mut t: Vec<Value> = (0..p_slots).map(|_| s.plaus.carrier.sample(sampler)).collect();
                t.extend((0..u_slots).map(|_| s.util.carrier.sample(sampler)));
                t
            })
            .collect()
    };
    let ppp = draw(3, 0);
    let uuu = draw(0, 3);
    let ppuu = draw(2, 2);

    let p = &s.plaus;
    let u = &s.util;
    let (po, uo) = (&p.order, &u.order);
    let (padd, pmul) = (&p.elim, &p.comb);
    let (uadd, umul, pu) = (&s.elim_u, &u.comb, &s.comb_pu);
    let mut c = Checker { checks: Vec::new() };

    c.run("plausibility oplus closure", &ppp, |t| p.carrier.contains(&padd.apply(&t[0], &t[1])));
    c.run("plausibility otimes closure", &ppp, |t| p.carrier.contains(&pmul.apply(&t[0], &t[1])));
    c.run("plausibility oplus commutativity", &ppp, |t| padd.apply(&t[0], &t[1]) == padd.apply(&t[1], &t[0]));
    c.run("plausibility oplus associativity", &ppp, |t| {
        padd.apply(&padd.apply(&t[0], &t[1]), &t[2]) == padd.apply(&t[0], &padd.apply(&t[1], &t[2]))
    });
    c.run("plausibility oplus identity 0_p", &ppp, |t| padd.apply(&t[0], &p.zero) == t[0]);
    c.run("plausibility otimes commutativity", &ppp, |t| pmul.apply(&t[0], &t[1]) == pmul.apply(&t[1], &t[0]));
    c.run("plausibility otimes associativity", &ppp, |t| {
        pmul.apply(&pmul.apply(&t[0], &t[1]), &t[2]) == pmul.apply(&t[0], &pmul.apply(&t[1], &t[2]))
    });
    c.run("plausibility otimes identity 1_p", &ppp, |t| pmul.apply(&t[0], &p.one) == t[0]);
    c.run("plausibility annihilator 0_p", &ppp, |t| pmul.apply(&t[0], &p.zero) == p.zero);
    c.run("plausibility distributivity", &ppp, |t| {
        pmul.apply(&t[0], &padd.apply(&t[1], &t[2]))
            == padd.apply(&pmul.apply(&t[0], &t[1]), &pmul.apply(&t[0], &t[2]))
    });
    c.run("plausibility 0_p is minimum", &ppp, |t| po.leq(&p.zero, &t[0]));
    c.run("plausibility oplus monotonicity", &ppp, |t| {
        !po.leq(&t[0], &t[1]) || po.leq(&padd.apply(&t[0], &t[2]), &padd.apply(&t[1], &t[2]))
    });
    c.run("plausibility otimes monotonicity", &ppp, |t| {
        !po.leq(&t[0], &t[1]) || po.leq(&pmul.apply(&t[0], &t[2]), &pmul.apply(&t[1], &t[2]))
    });

    c.run("utility otimes closure", &uuu, |t| u.carrier.contains(&umul.apply(&t[0], &t[1])));
    c.run("utility otimes commutativity", &uuu, |t| umul.apply(&t[0], &t[1]) == umul.apply(&t[1], &t[0]));
    c.run("utility otimes associativity", &uuu, |t| {
        umul.apply(&umul.apply(&t[0], &t[1]), &t[2]) == umul.apply(&t[0], &umul.apply(&t[1], &t[2]))
    });
    c.run("utility otimes identity 1_u", &uuu, |t| umul.apply(&t[0], &u.one) == t[0]);
    c.run("utility oplus closure", &uuu, |t| u.carrier.contains(&uadd.apply(&t[0], &t[1])));
    c.run("utility oplus commutativity", &uuu, |t| uadd.apply(&t[0], &t[1]) == uadd.apply(&t[1], &t[0]));
    c.run("utility oplus associativity", &uuu, |t| {
        uadd.apply(&uadd.apply(&t[0], &t[1]), &t[2]) == uadd.apply(&t[0], &uadd.apply(&t[1], &t[2]))
    });
    c.run("utility oplus identity 0_u", &uuu, |t| uadd.apply(&t[0], &s.zero_u) == t[0]);
    c.run("utility oplus monotonicity", &uuu, |t| {
        !uo.leq(&t[0], &t[1]) || uo.leq(&uadd.apply(&t[0], &t[2]), &uadd.apply(&t[1], &t[2]))
    });

    c.run("mixed otimes closure", &ppuu, |t| u.carrier.contains(&pu.apply(&t[0], &t[2])));
    c.run("mixed distributivity over utility oplus", &ppuu, |t| {
        pu.apply(&t[0], &uadd.apply(&t[2], &t[3])) == uadd.apply(&pu.apply(&t[0], &t[2]), &pu.apply(&t[0], &t[3]))
    });
    c.run("mixed distributivity over plausibility oplus", &ppuu, |t| {
        pu.apply(&padd.apply(&t[0], &t[1]), &t[2]) == uadd.apply(&pu.apply(&t[0], &t[2]), &pu.apply(&t[1], &t[2]))
    });
    c.run("mixed linearity", &ppuu, |t| {
        pu.apply(&t[0], &pu.apply(&t[1], &t[2])) == pu.apply(&pmul.apply(&t[0], &t[1]), &t[2])
    });
    c.run("0_p otimes_pu u = 0_u", &ppuu, |t| pu.apply(&p.zero, &t[2]) == s.zero_u);
    c.run("1_p otimes_pu u = u", &ppuu, |t| pu.apply(&p.one, &t[2]) == t[2]);
    c.run("mixed right monotonicity", &ppuu, |t| {
        !uo.leq(&t[2], &t[3]) || uo.leq(&pu.apply(&t[0], &t[2]), &pu.apply(&t[0], &t[3]))
    });

    if s.ax1 {
        let carriers_match = s.plaus.carrier == s.util.carrier;
        c.run("ax1 identities", &uuu, |t| {
            carriers_match
                && padd.apply(&t[0], &t[1]) == uadd.apply(&t[0], &t[1])
                && pmul.apply(&t[0], &t[1]) == umul.apply(&t[0], &t[1])
                && pmul.apply(&t[0], &t[1]) == pu.apply(&t[0], &t[1])
                && po.compare(&t[0], &t[1]) == uo.compare(&t[0], &t[1])
        });
    }
    if s.ax2 {
        c.run("ax2 identity", &uuu, |t| uadd.apply(&t[0], &t[1]) == umul.apply(&t[0], &t[1]));
    }

    AxiomReport { structure: s.name.clone(), exhaustive, checks: c.checks }
}
