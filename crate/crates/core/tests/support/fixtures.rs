//! Hand-built inputs with hand-derived expectations.

use ctgvd::corpus::{CommitCorpus, CommitRecord, FileSnapshot, Label};

pub const OVERFLOW_OLD: &str = "void f(char *str) {\n    int len = strlen(str);\n    char buf[BUF_SIZE];\n    if (len < BUF_SIZE)\n        memcpy(buf, str, len);\n}\n";
pub const OVERFLOW_NEW: &str = "void f(char *str) {\n    int len = strlen(str);\n    char buf[BUF_SIZE];\n    if (len < 2 * BUF_SIZE)\n        memcpy(buf, str, len);\n}\n";

const A0: &str = "void f(char *str) {\n    int len = strlen(str);\n    memcpy(buf, str, len);\n}\n";
const A1: &str = "void f(char *str) {\n    int len = strlen(str);\n    count = count + 1;\n    memcpy(buf, str, len);\n}\n";
const A2: &str = "void f(char *str) {\n    int len = strlen(str);\n    count = count + 1;\n    memcpy(buf, str, len + 1);\n}\n";
const A3: &str = "void f(char *str) {\n    int len = strlen(str);\n    count = count + 1;\n    if (len < BUF_SIZE)\n        memcpy(buf, str, len + 1);\n}\n";
const A4: &str = "void f(char *str) {\n    int len = strlen(str);\n    count = count + 1;\n    if (len < BUF_SIZE)\n        memcpy(buf, str, len + 1);\n    log(count);\n}\n";
const B0: &str = "int g(int n) {\n    int idx = n;\n    arr[idx] = 0;\n    return idx;\n}\n";
const B1: &str = "int g(int n) {\n    int idx = n + 1;\n    arr[idx] = 0;\n    return idx;\n}\n";

fn rec(id: &str, ts: i64, path: &str, before: Option<&str>, after: &str, fixes: Option<&str>) -> CommitRecord {
    CommitRecord {
        id: id.into(),
        parent: (ts > 1).then(|| format!("c{}", ts - 1)),
        timestamp: ts,
        project: "demo".into(),
        files: [(
            path.to_string(),
            FileSnapshot {
                before: before.map(Into::into),
                after: Some(after.into()),
            },
        )]
        .into_iter()
        .collect(),
        message: String::new(),
        fixes: fixes.map(Into::into),
    }
}

/// Eight commits, two vulnerabilities:
///
/// | commit | change                                   |
/// |--------|------------------------------------------|
/// | c1     | creates a.c (len declaration, memcpy)    |
/// | c2     | adds an unrelated counter line           |
/// | c3     | copies one byte too many (VULN-1)        |
/// | c4     | creates b.c                              |
/// | c5     | writes one past the index (VULN-2)       |
/// | c6     | guards the memcpy (fixes VULN-1)         |
/// | c7     | restores the index (fixes VULN-2)        |
/// | c8     | adds a logging call                      |
pub fn mining_corpus() -> CommitCorpus {
    CommitCorpus::new(vec![
        rec("c1", 1, "a.c", None, A0, None),
        rec("c2", 2, "a.c", Some(A0), A1, None),
        rec("c3", 3, "a.c", Some(A1), A2, None),
        rec("c4", 4, "b.c", None, B0, None),
        rec("c5", 5, "b.c", Some(B0), B1, None),
        rec("c6", 6, "a.c", Some(A2), A3, Some("VULN-1")),
        rec("c7", 7, "b.c", Some(B1), B0, Some("VULN-2")),
        rec("c8", 8, "a.c", Some(A3), A4, None),
    ])
    .expect("fixture history is consistent")
}

/// `(path, line)` pairs.
pub type Lines = &'static [(&'static str, usize)];

/// `(vulnerability, vcc, [(path, line in the fix's parent)])`. The guard in
/// c6 reaches the len declaration (data) and the memcpy (control) but not
/// the counter line right above it. The c7 fix deletes line 2 of b.c and its
/// replacement touches the parameter, the array write and the return.
pub const EXPECTED_VCCS: &[(&str, &str, Lines)] = &[
    ("VULN-1", "c1", &[("a.c", 2)]),
    ("VULN-1", "c3", &[("a.c", 4)]),
    ("VULN-2", "c4", &[("b.c", 1), ("b.c", 3), ("b.c", 4)]),
    ("VULN-2", "c5", &[("b.c", 2)]),
];

pub const EXPECTED_LABELS: &[(&str, Label, &[&str])] = &[
    ("c1", Label::Unlabeled, &[]),
    ("c2", Label::Unlabeled, &[]),
    ("c3", Label::Dangerous, &["VULN-1"]),
    ("c4", Label::Unlabeled, &[]),
    ("c5", Label::Dangerous, &["VULN-2"]),
    ("c6", Label::Safe, &[]),
    ("c7", Label::Safe, &[]),
    ("c8", Label::Unlabeled, &[]),
];

/// A mined VCC flattened for comparison.
pub type VccRow = (String, String, Vec<(String, usize)>);

pub fn expected_vcc_rows() -> Vec<VccRow> {
    EXPECTED_VCCS
        .iter()
        .map(|(v, c, ls)| (v.to_string(), c.to_string(), ls.iter().map(|(p, l)| (p.to_string(), *l)).collect()))
        .collect()
}
