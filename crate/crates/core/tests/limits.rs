//! Small instances where a bound holds only in a weaker form.

use num_bigint::BigInt;
use regtower::multilinear::{clone_external, MultilinearTower};
use regtower::regularize::{audit_partition, regularize, RegularizeOptions, StrongnessParams, ThresholdStyle, Verdict};
use regtower::text::parse_form;
use regtower::Field;

#[test]
fn strong_tower_can_outgrow_recursion_size() {
    let f3 = Field::Prime(3);
    let f = parse_form("x1*x2 + x3*x4", f3, 4).unwrap();
    let (tower, trace) = regularize(std::slice::from_ref(&f), &RegularizeOptions::new(1, 1, 1)).unwrap();
    assert_eq!(trace.audit.verdict, Verdict::Pass);
    assert!(trace.containment);
    assert_eq!(tower.size(), 2);
    assert_eq!(trace.predicted_size[0], BigInt::from(1));
    assert!(BigInt::from(tower.size() as u64) <= trace.size_bound[0]);

    let mut opts = RegularizeOptions::new(1, 1, 1);
    opts.style = ThresholdStyle::Recursion;
    let (tower, trace) = regularize(&[f], &opts).unwrap();
    assert!(BigInt::from(tower.size() as u64) <= trace.predicted_size[0]);
}

#[test]
fn external_clone_raises_lower_thresholds() {
    let f2 = Field::Prime(2);
    let t = MultilinearTower::parse("dims 2,2,2\nlayer\nsupport {1,2,3}\n(1,1,1)=1\n(2,2,2)=1\n", f2).unwrap();
    let params = StrongnessParams::integral(1, 1, 0).unwrap();
    assert_eq!(audit_partition(&t, &params, 1 << 20).unwrap().verdict, Verdict::Pass);
    let cloned = clone_external(&t, &[2], 2).unwrap().tower;
    let audit = audit_partition(&cloned, &params, 1 << 20).unwrap();
    assert_eq!(audit.verdict, Verdict::Fail);
    assert_eq!(audit.layers[0].verdict, Verdict::Fail);
    assert_eq!(audit.layers[1].verdict, Verdict::Pass);
}
