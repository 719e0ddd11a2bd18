//! The `family:key=value,...` reference descriptor grammar.

use std::collections::BTreeMap;
use std::path::Path;

use fbst::io::{read_reference_table, LoadError};
use fbst::{DensityFamily, ReferenceFunction};

#[derive(Debug)]
pub enum DescriptorError {
    /// The text does not follow the grammar; a usage error.
    Syntax(String),
    /// A `table:` file could not be read.
    Table(LoadError),
    /// Well-formed but the parameters are invalid.
    Invalid(fbst::Error),
}

impl std::fmt::Display for DescriptorError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DescriptorError::Syntax(m) => write!(f, "bad reference descriptor: {m}"),
            DescriptorError::Table(e) => write!(f, "reference table: {e}"),
            DescriptorError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

fn parse_params(family: &str, body: &str, allowed: &[&str]) -> Result<BTreeMap<String, f64>, DescriptorError> {
    let mut params = BTreeMap::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| DescriptorError::Syntax(format!("expected key=value, found {item:?}")))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(DescriptorError::Syntax(format!("{family} takes {}, not {key:?}", allowed.join(", "))));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| DescriptorError::Syntax(format!("{key} = {:?} is not a number", value.trim())))?;
        if params.insert(key.to_string(), value).is_some() {
            return Err(DescriptorError::Syntax(format!("{key} given twice")));
        }
    }
    Ok(params)
}

/// Parses `flat`, `normal:mean=..,sd=..`, `cauchy:location=..,scale=..`,
/// `student_t:location=..,scale=..,df=..` or `table:<path>`.
///
/// Omitted location/mean default to 0 and scale/sd to 1; `df` is required.
pub fn parse_reference(text: &str) -> Result<ReferenceFunction, DescriptorError> {
    let text = text.trim();
    let (family, body) = text.split_once(':').unwrap_or((text, ""));
    let invalid = DescriptorError::Invalid;
    match family.trim().to_ascii_lowercase().as_str() {
        "flat" if body.trim().is_empty() => Ok(ReferenceFunction::Flat),
        "flat" => Err(DescriptorError::Syntax("flat takes no parameters".into())),
        "normal" => {
            let p = parse_params("normal", body, &["mean", "sd"])?;
            let fam = DensityFamily::normal(p.get("mean").copied().unwrap_or(0.0), p.get("sd").copied().unwrap_or(1.0))
                .map_err(invalid)?;
            ReferenceFunction::parametric(fam).map_err(invalid)
        }
        "cauchy" => {
            let p = parse_params("cauchy", body, &["location", "scale"])?;
            let fam = DensityFamily::cauchy(
                p.get("location").copied().unwrap_or(0.0),
                p.get("scale").copied().unwrap_or(1.0),
            )
            .map_err(invalid)?;
            ReferenceFunction::parametric(fam).map_err(invalid)
        }
        "student_t" | "t" => {
            let p = parse_params("student_t", body, &["location", "scale", "df"])?;
            let df = *p.get("df").ok_or_else(|| DescriptorError::Syntax("student_t needs df".into()))?;
            let fam = DensityFamily::student_t(
                p.get("location").copied().unwrap_or(0.0),
                p.get("scale").copied().unwrap_or(1.0),
                df,
            )
            .map_err(invalid)?;
            ReferenceFunction::parametric(fam).map_err(invalid)
        }
        "table" => {
            let path = body.trim();
            if path.is_empty() {
                return Err(DescriptorError::Syntax("table needs a file path".into()));
            }
            let (grid, values) = read_reference_table(Path::new(path)).map_err(DescriptorError::Table)?;
            ReferenceFunction::tabulated(grid, values).map_err(invalid)
        }
        other => Err(DescriptorError::Syntax(format!(
            "unknown family {other:?} (expected flat, normal, cauchy, student_t or table)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn parses_families() {
        assert_eq!(parse_reference("flat").unwrap(), ReferenceFunction::Flat);
        let c = parse_reference("cauchy:location=0,scale=0.7071").unwrap();
        assert_eq!(c, ReferenceFunction::Parametric(DensityFamily::Cauchy { location: 0.0, scale: 0.7071 }));
        assert_eq!(c.descriptor(), "cauchy:location=0,scale=0.7071");
        let n = parse_reference("normal:sd=2.5").unwrap();
        assert_eq!(n, ReferenceFunction::Parametric(DensityFamily::Normal { mean: 0.0, sd: 2.5 }));
        assert!(matches!(
            parse_reference("student_t:df=3").unwrap(),
            ReferenceFunction::Parametric(DensityFamily::StudentT { df, .. }) if df == 3.0
        ));
    }

    #[test]
    fn rejects_bad_text() {
        for bad in [
            "gamma:shape=1",
            "normal:mu=1",
            "normal:sd",
            "normal:sd=x",
            "cauchy:scale=1,scale=2",
            "flat:x=1",
            "student_t",
            "table:",
        ] {
            assert!(matches!(parse_reference(bad), Err(DescriptorError::Syntax(_))), "{bad}");
        }
        assert!(matches!(parse_reference("cauchy:scale=-1"), Err(DescriptorError::Invalid(_))));
        assert!(matches!(parse_reference("table:/no/such/file.csv"), Err(DescriptorError::Table(_))));
    }
}
