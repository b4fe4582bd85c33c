use crate::classifiers::ClassifierKind;

pub const REPORT_HEADER: [&str; 10] = [
    "file",
    "language",
    "classifier",
    "adaptive",
    "train_seconds",
    "accuracy",
    "confusion",
    "fa",
    "miss",
    "der",
];

/// One scored (file, setting) pair. Error components are rates, i.e.
/// fractions of the scored reference speech.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub file: String,
    pub language: String,
    pub classifier: ClassifierKind,
    pub adaptive: bool,
    pub train_seconds: f64,
    pub accuracy: f64,
    pub confusion: f64,
    pub fa: f64,
    pub miss: f64,
    pub der: f64,
}

impl ReportRow {
    fn sort_key(&self) -> (&str, ClassifierKind, bool, f64) {
        (&self.file, self.classifier, self.adaptive, self.train_seconds)
    }
}

/// Renders rows as CSV, sorted by file then setting, floats at six decimals.
pub fn write_report(rows: &[ReportRow]) -> String {
    let mut sorted: Vec<&ReportRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        let (ka, kb) = (a.sort_key(), b.sort_key());
        (ka.0, ka.1, ka.2)
            .cmp(&(kb.0, kb.1, kb.2))
            .then(ka.3.total_cmp(&kb.3))
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER).expect("in-memory write");
    for r in sorted {
        let f = |x: f64| format!("{x:.6}");
        w.write_record([
            r.file.clone(),
            r.language.clone(),
            r.classifier.name().to_owned(),
            r.adaptive.to_string(),
            f(r.train_seconds),
            f(r.accuracy),
            f(r.confusion),
            f(r.fa),
            f(r.miss),
            f(r.der),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
