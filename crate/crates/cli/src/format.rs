//! Fixed-width float formatting and a small JSON emitter built on it.

use hillcert_core::{Complex64, ComplexMatrix};

/// C-style `%.12e`; non-finite values print as `inf`, `-inf` or `nan`.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj<K: Into<String>>(fields: impl IntoIterator<Item = (K, Json)>) -> Self {
        Json::Obj(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn num(x: f64) -> Self {
        Json::Num(x)
    }

    pub fn str(s: impl Into<String>) -> Self {
        Json::Str(s.into())
    }

    pub fn complex(z: Complex64) -> Self {
        Json::obj([("re", Json::Num(z.re)), ("im", Json::Num(z.im))])
    }

    pub fn complex_list(zs: &[Complex64]) -> Self {
        Json::Arr(zs.iter().map(|&z| Json::complex(z)).collect())
    }

    /// `{"re": [[..]], "im": [[..]]}` in row-major order.
    pub fn matrix(m: &ComplexMatrix) -> Self {
        let part = |f: fn(&Complex64) -> f64| {
            Json::Arr(
                (0..m.rows())
                    .map(|r| Json::Arr((0..m.cols()).map(|c| Json::Num(f(&m[(r, c)]))).collect()))
                    .collect(),
            )
        };
        Json::obj([("re", part(|z| z.re)), ("im", part(|z| z.im))])
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Num(x) if x.is_finite() => out.push_str(&fmt_e(*x)),
            Json::Num(_) => out.push_str("null"),
            Json::Str(s) => out.push_str(&serde_json::to_string(s).expect("string encodes")),
            Json::Arr(items) if items.iter().all(Json::is_scalar) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write(out, indent);
                }
                out.push(']');
            }
            Json::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    out.push_str(if i > 0 { ",\n" } else { "\n" });
                    pad(out, indent + 1);
                    item.write(out, indent + 1);
                }
                if !items.is_empty() {
                    out.push('\n');
                    pad(out, indent);
                }
                out.push(']');
            }
            Json::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    out.push_str(if i > 0 { ",\n" } else { "\n" });
                    pad(out, indent + 1);
                    out.push_str(&serde_json::to_string(k).expect("key encodes"));
                    out.push_str(": ");
                    v.write(out, indent + 1);
                }
                if !fields.is_empty() {
                    out.push('\n');
                    pad(out, indent);
                }
                out.push('}');
            }
        }
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Json::Arr(_) | Json::Obj(_))
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Joins already formatted fields into one CSV line.
pub fn csv_line(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        assert_eq!(fmt_e(0.1234567890123), "1.234567890123e-01");
        assert_eq!(fmt_e(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e(-12345.0), "-1.234500000000e+04");
        assert_eq!(fmt_e(1e-300), "1.000000000000e-300");
        assert_eq!(fmt_e(f64::INFINITY), "inf");
        assert_eq!(fmt_e(f64::NAN), "nan");
    }

    #[test]
    fn renders_nested_values() {
        let j = Json::obj([
            ("a", Json::Int(3)),
            ("b", Json::Arr(vec![Json::num(1.0), Json::num(f64::INFINITY)])),
            ("c", Json::obj([("s", Json::str("x\"y"))])),
        ]);
        let text = j.render();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"], 3);
        assert_eq!(back["b"][0], 1.0);
        assert!(back["b"][1].is_null());
        assert_eq!(back["c"]["s"], "x\"y");
    }
}
