use freedeconv::verify::{run, Suite};

fn check(suite: Suite) {
    let r = run(suite);
    for s in &r.suites {
        for c in &s.checks {
            println!("{} {}: value {:e} tol {:e} {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value, c.tolerance, c.detail);
        }
    }
    assert!(r.passed);
}

#[test]
fn transforms_suite() {
    check(Suite::Transforms);
}

#[test]
fn deconv_suite() {
    check(Suite::Deconv);
}

#[test]
fn cumulants_suite() {
    check(Suite::Cumulants);
}

#[test]
fn bpx_suite() {
    check(Suite::Bpx);
}
