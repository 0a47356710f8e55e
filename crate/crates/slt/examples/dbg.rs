use slt::verify::{check_sh_theta, check_hat_s, CaseId};
use slt::groups::Frob;
use std::time::Instant;
fn main() {
    let cases = [
        (2u32, 3u64, Frob::Plus), (2, 5, Frob::Plus), (2, 7, Frob::Plus), (2, 13, Frob::Plus),
        (3, 4, Frob::Plus), (3, 7, Frob::Plus), (3, 2, Frob::Minus), (5, 11, Frob::Plus),
    ];
    let total = Instant::now();
    for (n, q, frob) in cases {
        let case = CaseId { n, q, frob };
        let t0 = Instant::now();
        let r1 = check_sh_theta(case);
        let r2 = check_hat_s(case);
        println!("{case}: sh-theta {:?}, hat-s {:?} in {:?}", r1.map(|o| o.is_none()), r2.map(|o| o.is_none()), t0.elapsed());
    }
    println!("TOTAL: {:?}", total.elapsed());
}
