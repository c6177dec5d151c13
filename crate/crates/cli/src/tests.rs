use std::path::{Path, PathBuf};

use super::*;

const WORKED: [&str; 6] = ["--q", "82307", "--a1", "658", "--a2", "263610"];
const DEPTH3: [&str; 6] = ["--q", "19", "--a1", "1", "--a2", "23"];
const ZETA5: [&str; 6] = ["--q", "11", "--a1", "-9", "--a2", "41"];

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_str().unwrap().to_string()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).unwrap()
}

struct Run {
    code: u8,
    out: String,
    err: String,
}

/// Runs the command line in-process, sending the output to a file.
fn cmendo(field: &[&str], args: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.txt");
    let mut argv = vec!["cmendo"];
    argv.extend_from_slice(&args[..1.min(args.len())]);
    argv.extend_from_slice(field);
    argv.extend_from_slice(&args[1.min(args.len())..]);
    argv.extend(["--out", out.to_str().unwrap()]);
    let (code, err) = match Cli::try_parse_from(&argv) {
        Err(e) => (e.exit_code() as u8, e.to_string()),
        Ok(cli) => match execute(cli) {
            Ok(code) => (code, String::new()),
            Err(e) => (e.exit_code(), e.to_string()),
        },
    };
    Run { code, out: std::fs::read_to_string(&out).unwrap_or_default(), err }
}

fn assert_golden(field: &[&str], args: &[&str], name: &str) {
    let r = cmendo(field, args);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out, golden(name), "{}", name);
}

#[test]
fn golden_outputs() {
    assert_golden(&WORKED, &["validate"], "worked/requirements.txt");
    assert_golden(&WORKED, &["ideal-id"], "worked/ideal-id.txt");
    assert_golden(&DEPTH3, &["validate"], "depth3/requirements.txt");
    assert_golden(&DEPTH3, &["ideal-id"], "depth3/ideal-id.txt");
    assert_golden(&ZETA5, &["validate"], "zeta5/requirements.txt");
    assert_golden(&WORKED, &["classgroup", "--order", "p11_1", "--element", "7 6 1 1"], "worked/element-p11.txt");
    assert_golden(&WORKED, &["classgroup", "--order", "p131_28", "--element", "7 6 1 1"], "worked/element-p131.txt");
    assert_golden(&["--q", "29", "--a1", "5", "--a2", "37"], &["classgroup", "--classgroup-seed", "0"], "two-primes/classgroup-v.txt");
    assert_golden(&["--q", "29", "--a1", "5", "--a2", "37"], &["ideal-id"], "two-primes/ideal-id.txt");
}

#[test]
fn certificates_are_byte_stable() {
    for u in ["1", "p11_1", "p131_28", "v"] {
        assert_golden(&WORKED, &["certify", "--seed", "7", "--u", u], &format!("worked/cert-{}.txt", u));
    }
    for u in ["1", "p3_0", "v"] {
        assert_golden(&DEPTH3, &["certify", "--seed", "7", "--u", u], &format!("depth3/cert-{}.txt", u));
    }
    assert_golden(&[], &["certify", "--job", &fixture("two-primes/certify.toml")], "two-primes/cert-v.txt");
}

#[test]
fn job_files_drive_commands() {
    let job = fixture("worked/compute-endo.toml");
    assert_golden(&[], &["compute-endo", "--job", &job], "worked/endo.txt");
    // the job names its command
    assert_eq!(cmendo(&[], &["certify", "--job", &job]).code, 2);
    // flags override the job
    let r = cmendo(&[], &["compute-endo", "--job", &job, "--simulate", "hidden=p11_1"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("factored = p11_1\n"));
    assert_golden(&DEPTH3, &["simulate", "--simulate", "hidden=p3_0", "--simulate", "seed=5"], "depth3/simulate.txt");
}

#[test]
fn verify_accepts_the_matching_variety_only() {
    let cert = fixture("worked/cert-p131_28.txt");
    for (hidden, expected) in [("p131_28", 0), ("v", 1), ("1", 1)] {
        let h = format!("hidden={}", hidden);
        let r = cmendo(&WORKED, &["verify", "--cert", &cert, "--simulate", &h, "--simulate", "seed=3"]);
        assert_eq!(r.code, expected, "hidden = {}: {}{}", hidden, r.out, r.err);
        assert!(r.out.contains(if expected == 0 { "valid = true" } else { "valid = false" }));
    }
}

#[test]
fn deeper_volcanoes_from_the_command_line() {
    for (hidden, fplus) in [("1", "1"), ("p3_0", "p3_0"), ("p3_0^2", "p3_0^2"), ("v", "p3_0^3")] {
        let h = format!("hidden={}", hidden);
        let r = cmendo(&DEPTH3, &["compute-endo", "--c-bound", "12", "--simulate", &h, "--simulate", "seed=2"]);
        assert_eq!(r.code, 0, "{}", r.err);
        assert!(r.out.contains(&format!("factored = {}\n", fplus)), "{}", r.out);
        assert!(r.out.contains("[climb]"));
    }
    // a shallower volcano through a depth override
    let r = cmendo(&DEPTH3, &["simulate", "--simulate", "depth.p3_0=1", "--simulate", "hidden=v"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("v = [[3, 0], [0, 1]]\n"), "{}", r.out);
}

#[test]
fn cache_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("flag");
    let args = ["classgroup", "--classgroup-seed", "0", "--cache-dir", cache.to_str().unwrap()];
    assert_golden(&["--q", "29", "--a1", "5", "--a2", "37"], &args, "two-primes/classgroup-v.txt");
    let mut names: Vec<String> = std::fs::read_dir(&cache).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    // the maximal order is computed on the way
    assert_eq!(names, ["cg_29_5_37_f1-0-0-1_bauto_s0.txt", "cg_29_5_37_f1-23-0-35_bauto_s0.txt"]);
    assert_eq!(std::fs::read_to_string(cache.join(&names[1])).unwrap(), golden("two-primes/classgroup-v.txt"));
    // a second run reads the files back
    assert_golden(&["--q", "29", "--a1", "5", "--a2", "37"], &args, "two-primes/classgroup-v.txt");

    let env_dir = dir.path().join("env");
    std::env::set_var(cmendo::classgroup::cache::CACHE_ENV, &env_dir);
    let r = cmendo(&["--q", "19", "--a1", "3", "--a2", "9"], &["classgroup", "--classgroup-seed", "4"]);
    std::env::remove_var(cmendo::classgroup::cache::CACHE_ENV);
    assert_eq!(r.code, 0, "{}", r.err);
    let f = env_dir.join("cg_19_3_9_f5-0-0-1_bauto_s4.txt");
    assert_eq!(std::fs::read_to_string(f).unwrap(), r.out);
}

#[test]
fn output_file_is_written() {
    let r = cmendo(&WORKED, &["ideal-id"]);
    assert_eq!(r.out, golden("worked/ideal-id.txt"));
    let r = cmendo(&WORKED, &["ideal-id", "--out", "/nonexistent/dir/x.txt"]);
    assert_eq!(r.code, 2);
}

#[test]
fn computational_failures_exit_1() {
    // no relation separates an order from itself
    let r = cmendo(&WORKED, &["find-relation", "--holds-in", "v", "--fails-in", "v", "--max-trials", "20"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("no relation"), "{}", r.err);
    let r = cmendo(&DEPTH3, &["find-relation", "--prime", "p3_0", "--power", "4"]);
    assert_eq!(r.code, 1, "{}", r.err);
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(cmendo(&[], &["validate"]).code, 2);
    assert_eq!(cmendo(&[], &["frobnicate"]).code, 2);
    assert_eq!(cmendo(&["--q", "82307"], &["ideal-id"]).code, 2);
    assert_eq!(cmendo(&WORKED, &["ideal-id", "--order", "p12"]).code, 2);
    assert_eq!(cmendo(&WORKED, &["compute-endo", "--simulate", "colour=red"]).code, 2);
    assert_eq!(cmendo(&WORKED, &["find-relation", "--prime", "p11_1", "--holds-in", "v"]).code, 2);
    let r = cmendo(&WORKED, &["compute-endo"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("backend"), "{}", r.err);
    let r = cmendo(&WORKED, &["verify", "--cert", "/nonexistent/cert.txt", "--simulate", "hidden=v"]);
    assert_eq!(r.code, 2);

    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.toml");
    std::fs::write(&job, "command = \"validate\"\n[field]\nq = 19\na1 = 1\na2 = 23\ncolour = 1\n").unwrap();
    let r = cmendo(&[], &["validate", "--job", job.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("line 6") && r.err.contains("colour"), "{}", r.err);

    let bad = dir.path().join("cert.txt");
    std::fs::write(&bad, golden("worked/cert-v.txt").replace("cmendo-cert/1", "cmendo-cert/9")).unwrap();
    let r = cmendo(&WORKED, &["verify", "--cert", bad.to_str().unwrap(), "--simulate", "hidden=v"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("line 1"), "{}", r.err);
    // a certificate for another field
    let r = cmendo(&DEPTH3, &["verify", "--cert", &fixture("worked/cert-v.txt"), "--simulate", "hidden=v"]);
    assert_eq!(r.code, 2);
}

#[test]
fn requirements_exit_3_unless_forced() {
    assert_eq!(cmendo(&ZETA5, &["classgroup"]).code, 3);
    assert_eq!(cmendo(&ZETA5, &["certify", "--u", "1"]).code, 3);
    let r = cmendo(&ZETA5, &["classgroup", "--force"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.starts_with("cmendo-classgroup/1\n"));
    // validation itself never fails on requirements
    assert_eq!(cmendo(&ZETA5, &["validate"]).code, 0);
}
