use std::path::Path;
use std::process::{Command, Output};

#[allow(dead_code)]
pub const THEORY_FIXTURES: [&str; 6] = ["triv", "pointed", "monoid", "cmon", "group", "abgroup"];

/// Every command run against the fixture corpus. Paths are relative to the
/// crate root, which is the working directory of every run.
pub fn fixture_commands() -> Vec<Vec<&'static str>> {
    vec![
        vec!["models", "--theory", "fixtures/cmon.thy", "--size", "2", "--up-to-iso"],
        vec!["models", "--theory", "fixtures/monoid.thy", "--size", "3", "--up-to-iso"],
        vec!["--format", "table", "models", "--theory", "fixtures/group.thy", "--size", "3"],
        vec!["homs", "--theory", "fixtures/cmon.thy", "--size", "3"],
        vec!["spans", "--first", "[[1,1]]", "--second", "[[2],[1]]"],
        vec!["spans", "--random", "200", "--semiadditive", "3"],
        vec!["spans", "--semiring", "z4", "--first", "[[1,3],[2,2]]", "--second", "[[3,1]]", "--semiadditive", "2"],
        vec!["kron", "--left", "fixtures/triv.thy", "--right", "fixtures/cmon.thy", "--check-bimodels", "--size", "3"],
        vec!["kron", "--left", "fixtures/monoid.thy", "--right", "fixtures/monoid.thy", "--eckmann-hilton", "--size", "3"],
        vec!["kron", "--left", "fixtures/pointed.thy", "--right", "fixtures/monoid.thy", "--check-bimodels", "--size", "3"],
        vec!["free", "--theory", "fixtures/abgroup.thy", "--generators", "2", "--bound", "2"],
        vec!["yoneda", "--theory", "fixtures/cmon.thy", "--m", "2", "--n", "2", "--bound", "2"],
        vec!["marks", "--group", "fixtures/c2.json"],
        vec!["--format", "table", "marks", "--group", "fixtures/s3.json"],
        vec!["burnside", "--group", "fixtures/s3.json"],
        vec!["check", "--theory", "fixtures/cmon.thy", "--model", "fixtures/z2.model.json"],
        vec!["check", "--theory", "fixtures/cmon.thy", "--model", "fixtures/bad_unit.model.json"],
        vec!["check", "--group", "fixtures/c2.json", "--elmendorf", "2"],
        vec!["models", "--theory", "fixtures/arity.thy", "--size", "1"],
        vec!["models", "--theory", "fixtures/syntax.thy", "--size", "1"],
    ]
}

pub fn lawvere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lawvere"))
        .args(args)
        .current_dir(Path::new(env!("CARGO_MANIFEST_DIR")))
        .output()
        .expect("binary runs")
}
