//! Textual serialization of forms: normalized coefficient expressions over
//! sorted index tuples, one term per line. Output re-parses to a
//! coefficient-identical form through the expression grammar.
//!
//! ```text
//! chart: x1 y1 z1 p1
//! degree: 2
//! (x1,y1): 1 + p1
//! (x1,p1): y1
//! (z1,p1): -1
//! ```

use std::sync::Arc;

use thiserror::Error;

use crate::chart::Chart;
use crate::expr::{parse, ExprError};
use crate::forms::{FormError, KForm};

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown coordinate `{name}`")]
    UnknownCoordinate { line: usize, name: String },
    #[error("line {line}: {source}")]
    Expression {
        line: usize,
        #[source]
        source: ExprError,
    },
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Serialize a form: header lines, then one `(names): coefficient` line per
/// stored tuple in table order.
pub fn render_form(form: &KForm) -> String {
    let form = form.normalized();
    let chart = form.chart();
    let mut out = String::new();
    out.push_str(&format!("chart: {chart}\n"));
    out.push_str(&format!("degree: {}\n", form.degree()));
    for (tuple, coeff) in form.terms() {
        let names: Vec<&str> = tuple.iter().map(|&i| chart.name(i)).collect();
        out.push_str(&format!(
            "({}): {}\n",
            names.join(","),
            coeff.display(chart)
        ));
    }
    out
}

/// Parse the output of [`render_form`] back into a form on `chart`.
pub fn parse_form(text: &str, chart: Arc<Chart>) -> Result<KForm, EmitError> {
    let mut degree: Option<usize> = None;
    let mut terms: Vec<(Vec<usize>, crate::expr::Expr)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if let Some(names) = content.strip_prefix("chart:") {
            let expected: Vec<&str> = names.split_whitespace().collect();
            let actual: Vec<&str> = chart.names().collect();
            if expected != actual {
                return Err(EmitError::Parse {
                    line,
                    message: format!(
                        "chart header `{}` does not match expected chart `{chart}`",
                        names.trim()
                    ),
                });
            }
            continue;
        }
        if let Some(d) = content.strip_prefix("degree:") {
            degree = Some(d.trim().parse().map_err(|_| EmitError::Parse {
                line,
                message: format!("bad degree `{}`", d.trim()),
            })?);
            continue;
        }
        let rest = content.strip_prefix('(').ok_or(EmitError::Parse {
            line,
            message: "expected `(names): coefficient`".to_string(),
        })?;
        let (names, coeff_text) = rest.split_once("):").ok_or(EmitError::Parse {
            line,
            message: "expected `(names): coefficient`".to_string(),
        })?;
        let mut tuple = Vec::new();
        for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match chart.index_of(name) {
                Some(i) => tuple.push(i),
                None => {
                    return Err(EmitError::UnknownCoordinate {
                        line,
                        name: name.to_string(),
                    })
                }
            }
        }
        let coeff =
            parse(coeff_text.trim(), &chart).map_err(|source| EmitError::Expression {
                line,
                source,
            })?;
        terms.push((tuple, coeff));
    }
    let degree = degree.ok_or(EmitError::Parse {
        line: 0,
        message: "missing `degree:` header".to_string(),
    })?;
    Ok(KForm::from_terms(chart, degree, terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presymplectic::PresymplecticModel;
    use crate::thickening::{classical_thickening, worked_example_connection};

    #[test]
    fn worked_example_round_trips() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let tm = classical_thickening(&worked_example_connection(), &model).unwrap();
        let text = render_form(tm.omega_tilde());
        assert!(text.contains("chart: x1 y1 z1 p1"));
        assert!(text.contains("(x1,y1): 1 + p1"));
        assert!(text.contains("(z1,p1): -1"));
        let parsed = parse_form(&text, tm.chart().clone()).unwrap();
        assert_eq!(&parsed, tm.omega_tilde());
    }

    #[test]
    fn zero_form_round_trips() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let zero = KForm::zero(model.chart().clone(), 2);
        let text = render_form(&zero);
        let parsed = parse_form(&text, model.chart().clone()).unwrap();
        assert_eq!(parsed, zero);
    }

    #[test]
    fn wrong_chart_header_is_rejected() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let text = "chart: x1 y1\ndegree: 2\n";
        assert!(matches!(
            parse_form(text, model.chart().clone()),
            Err(EmitError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn unknown_coordinate_in_tuple_is_rejected() {
        let model = PresymplecticModel::darboux(1, 1).unwrap();
        let text = "degree: 2\n(x1,q9): 1\n";
        assert!(matches!(
            parse_form(text, model.chart().clone()),
            Err(EmitError::UnknownCoordinate { line: 2, .. })
        ));
    }
}
