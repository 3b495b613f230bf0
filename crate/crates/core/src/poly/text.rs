//! Text and JSON encodings of forms.
//!
//! Text grammar: terms `coeff * x0^a0*x1^a1*...` joined by `+`/`-`, where a
//! coefficient is a real number, a fraction `p/q`, or a complex pair `(re,im)`.
//! JSON: `{"nvars":3,"degree":5,"terms":[{"exp":[5,0,0],"c":[38,0]}]}`, or a
//! symmetric tensor `{"tensor":{"dim":3,"order":3,"entries":[...]}}` with the
//! `dim^order` entries flattened in row-major order.

use serde::{Deserialize, Serialize};

use super::homogeneous::multinomial_f64;
use super::{Exponent, HomogeneousPoly};
use crate::error::{Error, Result};
use crate::linalg::C64;

pub mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Pair([f64; 2]),
        Real(f64),
    }

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Pair([a, b]) => C64::new(a, b),
            Repr::Real(a) => C64::new(a, 0.0),
        })
    }

    pub(crate) fn from_value(v: &serde_json::Value) -> Option<C64> {
        match v {
            serde_json::Value::Number(n) => n.as_f64().map(|x| C64::new(x, 0.0)),
            serde_json::Value::Array(a) if a.len() == 2 => {
                Some(C64::new(a[0].as_f64()?, a[1].as_f64()?))
            }
            _ => None,
        }
    }
}

pub mod complex_pairs {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw: Vec<serde_json::Value> = Vec::deserialize(d)?;
        raw.iter()
            .map(|v| {
                super::complex_pair::from_value(v)
                    .ok_or_else(|| serde::de::Error::custom("expected number or [re, im]"))
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TermJson {
    pub exp: Vec<u32>,
    #[serde(with = "complex_pair")]
    pub c: C64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct PolyJson {
    pub nvars: usize,
    pub degree: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Deserialize, Debug)]
struct TensorBody {
    dim: usize,
    order: u32,
    #[serde(with = "complex_pairs")]
    entries: Vec<C64>,
}

#[derive(Deserialize, Debug)]
struct TensorJson {
    tensor: TensorBody,
}

impl From<&HomogeneousPoly> for PolyJson {
    fn from(f: &HomogeneousPoly) -> Self {
        PolyJson {
            nvars: f.n_vars(),
            degree: f.degree(),
            terms: f
                .coeffs()
                .iter()
                .map(|(e, c)| TermJson { exp: e.parts().to_vec(), c: *c })
                .collect(),
        }
    }
}

impl TryFrom<PolyJson> for HomogeneousPoly {
    type Error = Error;

    fn try_from(p: PolyJson) -> Result<Self> {
        HomogeneousPoly::new(
            p.nvars,
            p.degree,
            p.terms.into_iter().map(|t| (Exponent::new(t.exp), t.c)),
        )
    }
}

pub fn to_json(f: &HomogeneousPoly) -> String {
    serde_json::to_string(&PolyJson::from(f)).expect("plain data serializes")
}

/// Parses either the text grammar or one of the JSON schemas.
pub fn parse_input(text: &str) -> Result<HomogeneousPoly> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text, None)
    }
}

pub fn parse_json(text: &str) -> Result<HomogeneousPoly> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        pos: e.column(),
        msg: format!("line {}: {}", e.line(), e),
    })?;
    if value.get("tensor").is_some() {
        let t: TensorJson = serde_json::from_value(value)
            .map_err(|e| Error::Parse { pos: 0, msg: format!("tensor schema: {e}") })?;
        return tensor_to_form(t.tensor.dim, t.tensor.order, &t.tensor.entries);
    }
    let p: PolyJson = serde_json::from_value(value)
        .map_err(|e| Error::Parse { pos: 0, msg: format!("polynomial schema: {e}") })?;
    HomogeneousPoly::try_from(p)
}

/// `f = sum_{i_1..i_d} T[i_1..i_d] x_{i_1} ... x_{i_d}`; the tensor must be symmetric.
pub fn tensor_to_form(dim: usize, order: u32, entries: &[C64]) -> Result<HomogeneousPoly> {
    let expected = dim.checked_pow(order).unwrap_or(usize::MAX);
    if entries.len() != expected {
        return Err(Error::InvalidInput(format!(
            "tensor of dimension {dim} and order {order} needs {expected} entries, got {}",
            entries.len()
        )));
    }
    let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut terms = Vec::new();
    let mut seen: std::collections::BTreeMap<Exponent, C64> = Default::default();
    for (flat, val) in entries.iter().enumerate() {
        let mut parts = vec![0u32; dim];
        let mut rest = flat;
        for _ in 0..order {
            parts[rest % dim] += 1;
            rest /= dim;
        }
        let e = Exponent::new(parts);
        match seen.get(&e) {
            Some(prev) if (prev - val).norm() > 1e-12 * scale.max(1.0) => {
                return Err(Error::InvalidInput(format!(
                    "tensor is not symmetric at multi-index {}",
                    e.format_with_offset(0)
                )))
            }
            Some(_) => {}
            None => {
                seen.insert(e.clone(), *val);
                let w = multinomial_f64(&e);
                terms.push((e, val * w));
            }
        }
    }
    HomogeneousPoly::new(dim, order, terms)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let mut seen_digit = false;
        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        while let Some(ch) = self.peek() {
            if ch.is_ascii_digit() {
                seen_digit = true;
                self.pos += 1;
            } else if ch == b'.' {
                self.pos += 1;
            } else if (ch == b'e' || ch == b'E') && seen_digit {
                self.pos += 1;
                if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        if !seen_digit {
            self.pos = start;
            return self.err("expected a number");
        }
        s.parse::<f64>().map_err(|_| Error::Parse { pos: start, msg: format!("bad number '{s}'") })
    }

    fn unsigned_int(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse { pos: start, msg: "integer overflow".into() })
    }

    fn coefficient(&mut self) -> Result<C64> {
        self.skip_ws();
        if self.eat(b'(') {
            let a = self.number()?;
            if !self.eat(b',') {
                return self.err("expected ',' in complex coefficient");
            }
            let b = self.number()?;
            if !self.eat(b')') {
                return self.err("expected ')' closing complex coefficient");
            }
            return Ok(C64::new(a, b));
        }
        let a = self.number()?;
        if self.eat(b'/') {
            let b = self.number()?;
            if b == 0.0 {
                return self.err("division by zero in coefficient");
            }
            return Ok(C64::new(a / b, 0.0));
        }
        Ok(C64::new(a, 0.0))
    }

    /// `x<i>` or `x_<i>`, optionally `^<k>`.
    fn factor(&mut self) -> Result<(usize, u32)> {
        self.skip_ws();
        if self.peek() != Some(b'x') {
            return self.err("expected a variable like x0");
        }
        self.pos += 1;
        if self.peek() == Some(b'_') {
            self.pos += 1;
        }
        if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            return self.err("expected a variable index after 'x'");
        }
        let var = self.unsigned_int()? as usize;
        let pow = if self.eat(b'^') { self.unsigned_int()? } else { 1 };
        Ok((var, pow))
    }

    fn term(&mut self) -> Result<(C64, Vec<(usize, u32)>)> {
        self.skip_ws();
        let mut coef = C64::new(1.0, 0.0);
        let mut factors = Vec::new();
        if self.peek() == Some(b'x') {
            factors.push(self.factor()?);
        } else {
            coef = self.coefficient()?;
        }
        while self.eat(b'*') {
            factors.push(self.factor()?);
        }
        Ok((coef, factors))
    }
}

/// Term start offset, coefficient, and `(variable, power)` factors.
type RawTerm = (usize, C64, Vec<(usize, u32)>);

/// Parses the text grammar. `nvars` overrides the variable count inferred from
/// the highest index that occurs.
pub fn parse_text(text: &str, nvars: Option<usize>) -> Result<HomogeneousPoly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let mut raw: Vec<RawTerm> = Vec::new();
    let mut sign = 1.0;
    p.skip_ws();
    if p.eat(b'-') {
        sign = -1.0;
    } else {
        p.eat(b'+');
    }
    loop {
        p.skip_ws();
        let start = p.pos;
        let (c, f) = p.term()?;
        raw.push((start, c * sign, f));
        p.skip_ws();
        match p.peek() {
            None => break,
            Some(b'+') => {
                p.pos += 1;
                sign = 1.0;
            }
            Some(b'-') => {
                p.pos += 1;
                sign = -1.0;
            }
            Some(ch) => return p.err(format!("unexpected character '{}'", ch as char)),
        }
    }
    let max_var = raw.iter().flat_map(|(_, _, f)| f.iter().map(|(v, _)| *v)).max();
    let n = match (nvars, max_var) {
        (Some(n), Some(m)) if m >= n => {
            return Err(Error::Parse { pos: 0, msg: format!("variable x{m} exceeds nvars = {n}") })
        }
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => return Err(Error::Parse { pos: 0, msg: "no variables in input".into() }),
    };
    let mut degree = None;
    let mut terms = Vec::with_capacity(raw.len());
    for (pos, c, factors) in raw {
        let mut parts = vec![0u32; n];
        for (v, k) in factors {
            parts[v] += k;
        }
        let e = Exponent::new(parts);
        match degree {
            None => degree = Some(e.degree()),
            Some(d) if d != e.degree() => {
                return Err(Error::Parse {
                    pos,
                    msg: format!("non-homogeneous input: term of degree {} in a degree-{d} form", e.degree()),
                })
            }
            _ => {}
        }
        terms.push((e, c));
    }
    let d = degree.unwrap_or(0);
    if d == 0 {
        return Err(Error::Parse { pos: 0, msg: "constant input has no degree".into() });
    }
    HomogeneousPoly::new(n, d, terms)
}

fn format_coeff(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({},{})", c.re, c.im)
    }
}

/// Renders a form in the text grammar accepted by [`parse_text`].
pub fn format_poly(f: &HomogeneousPoly) -> String {
    let mut out = String::new();
    for (i, (e, c)) in f.coeffs().iter().enumerate() {
        let (neg, mag) = if c.im == 0.0 && c.re < 0.0 { (true, -c) } else { (false, *c) };
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&format_coeff(mag));
        out.push('*');
        out.push_str(&e.format_with_offset(0));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn parses_monomial() {
        let f = parse_input("x0^3").unwrap();
        assert_eq!(f.n_vars(), 1);
        assert_eq!(f.degree(), 3);
        assert_eq!(f.coeff(&Exponent::new(vec![3])), re(1.0));
    }

    #[test]
    fn parses_extreme_rank_input() {
        let f = parse_input("x0^2*x1 + x0*x2^2").unwrap();
        assert_eq!(f.n_vars(), 3);
        assert_eq!(f.coeff(&Exponent::new(vec![2, 1, 0])), re(1.0));
        assert_eq!(f.coeff(&Exponent::new(vec![1, 0, 2])), re(1.0));
    }

    #[test]
    fn parses_complex_and_fraction_coefficients() {
        let f = parse_input("(1.5,-2)*x0*x1 - 57/4*x1^2 + 2e1*x_0^2").unwrap();
        assert_eq!(f.coeff(&Exponent::new(vec![1, 1])), C64::new(1.5, -2.0));
        assert_eq!(f.coeff(&Exponent::new(vec![0, 2])), re(-14.25));
        assert_eq!(f.coeff(&Exponent::new(vec![2, 0])), re(20.0));
    }

    #[test]
    fn non_homogeneous_reports_position() {
        let err = parse_input("x0^2 + x1").unwrap_err();
        match err {
            Error::Parse { pos, msg } => {
                assert_eq!(pos, 7);
                assert!(msg.contains("non-homogeneous"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_syntax_reports_position() {
        let err = parse_input("3*x0^2 + * x1^2").unwrap_err();
        assert!(matches!(err, Error::Parse { pos: 9, .. }), "{err:?}");
        assert!(parse_input("3*y0").is_err());
        assert!(parse_input("(1,2*x0").is_err());
    }

    #[test]
    fn json_schema() {
        let f = parse_input(r#"{"nvars":3,"degree":5,"terms":[{"exp":[5,0,0],"c":[38,0]},{"exp":[4,1,0],"c":-120}]}"#).unwrap();
        assert_eq!(f.coeff(&Exponent::new(vec![5, 0, 0])), re(38.0));
        assert_eq!(f.coeff(&Exponent::new(vec![4, 1, 0])), re(-120.0));
        assert!(parse_input(r#"{"nvars":2,"degree":2,"terms":[{"exp":[1,0],"c":1}]}"#).is_err());
    }

    #[test]
    fn tensor_input_uses_multinomial_weights() {
        // T = symmetric 2x2 with T00 = 1, T01 = T10 = 2, T11 = 3  ->  x0^2 + 4 x0 x1 + 3 x1^2
        let f = parse_input(r#"{"tensor":{"dim":2,"order":2,"entries":[1,2,2,3]}}"#).unwrap();
        assert_eq!(f.coeff(&Exponent::new(vec![2, 0])), re(1.0));
        assert_eq!(f.coeff(&Exponent::new(vec![1, 1])), re(4.0));
        assert_eq!(f.coeff(&Exponent::new(vec![0, 2])), re(3.0));
        let bad = parse_input(r#"{"tensor":{"dim":2,"order":2,"entries":[1,2,5,3]}}"#);
        assert!(matches!(bad, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn text_round_trip() {
        let f = parse_input("-3*x0^2*x1 + (0.5,-1)*x1^3 + 7*x0*x2^2").unwrap();
        let g = parse_text(&format_poly(&f), Some(f.n_vars())).unwrap();
        assert_eq!(f, g);
    }
}
