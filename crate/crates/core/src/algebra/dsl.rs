//! Text formats: the presentation DSL and the expression grammar.
//!
//! The grammar is written out in `docs/presentation.bnf`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::poly::Polynomial;
use super::presentation::{ClassTag, Presentation, Rule, DEFAULT_STEP_BUDGET};
use super::word::GenId;
use super::AlgebraError;

fn syntax(line: usize, column: usize, message: impl Into<String>) -> AlgebraError {
    AlgebraError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Generator names start with a letter or `_` and may not contain
/// whitespace, operators or the adjoint marker `'`.
pub(crate) fn check_generator_name(name: &str) -> Result<(), AlgebraError> {
    let mut chars = name.chars();
    let ok = match chars.next() {
        Some(c) if is_ident_start(c) => chars.all(|c| {
            !c.is_whitespace() && !matches!(c, '+' | '-' | '(' | ')' | '\'' | ';' | '#' | '^' | ',')
        }),
        _ => false,
    };
    if !ok || name == "i" {
        return Err(AlgebraError::InvalidPresentation(format!(
            "invalid generator name `{name}`"
        )));
    }
    Ok(())
}

struct Statement {
    line: usize,
    column: usize,
    text: String,
}

fn split_statements(text: &str) -> Vec<Statement> {
    let mut out = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut start = 0usize;
        for piece in line.split(';') {
            let leading = piece.len() - piece.trim_start().len();
            let trimmed = piece.trim();
            if !trimmed.is_empty() {
                out.push(Statement {
                    line: line_no + 1,
                    column: line[..start + leading].chars().count() + 1,
                    text: trimmed.to_string(),
                });
            }
            start += piece.len() + 1;
        }
    }
    out
}

/// Parses a single complex literal: `1.5`, `-2i`, `i`, `0.5+0.25i`, `1-i`.
pub fn parse_complex_literal(text: &str) -> Option<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let parse_imag = |s: &str| -> Option<f64> {
        let body = s.strip_suffix('i')?;
        match body {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => body.parse().ok(),
        }
    };
    if !t.ends_with('i') {
        return t.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    }
    // split at the last sign that is not part of an exponent
    let bytes = t.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    match split {
        Some(k) => {
            let re: f64 = t[..k].parse().ok()?;
            let im = parse_imag(&t[k..])?;
            Some(Complex64::new(re, im))
        }
        None => parse_imag(&t).map(|im| Complex64::new(0.0, im)),
    }
}

/// Parses a presentation document.
pub fn parse_presentation(text: &str) -> Result<Presentation, AlgebraError> {
    let statements = split_statements(text);
    let mut class: Option<(ClassTag, usize, usize)> = None;
    let mut modes: Option<usize> = None;
    let mut index_base = 1u32;
    let mut params = BTreeMap::new();
    let mut gram: Option<Vec<Complex64>> = None;
    let mut budget = DEFAULT_STEP_BUDGET;
    let mut gens: Vec<(String, Option<String>, usize, usize)> = Vec::new();
    let mut rules: Vec<(&Statement, usize)> = Vec::new();

    for st in &statements {
        let (keyword, rest) = match st.text.find(char::is_whitespace) {
            Some(k) => (&st.text[..k], st.text[k..].trim_start()),
            None => (st.text.as_str(), ""),
        };
        let rest_col = st.column + st.text.len() - rest.len();
        match keyword {
            "class" => {
                let tag = ClassTag::parse(rest)
                    .ok_or_else(|| AlgebraError::UnknownClass(rest.to_string()))?;
                if class.is_some() {
                    return Err(syntax(st.line, st.column, "duplicate `class` statement"));
                }
                class = Some((tag, st.line, st.column));
            }
            "modes" => {
                let n = rest
                    .parse::<usize>()
                    .map_err(|_| syntax(st.line, rest_col, "`modes` expects a nonnegative integer"))?;
                modes = Some(n);
            }
            "index_base" => {
                index_base = rest.parse::<u32>().map_err(|_| {
                    syntax(st.line, rest_col, "`index_base` expects a nonnegative integer")
                })?;
            }
            "budget" => {
                budget = rest
                    .parse::<usize>()
                    .map_err(|_| syntax(st.line, rest_col, "`budget` expects a positive integer"))?;
            }
            "param" => {
                let (name, value) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(st.line, rest_col, "expected `param <name>=<real>`"))?;
                let name = name.trim();
                if name.is_empty() || !name.chars().all(is_ident_char) || name == "i" {
                    return Err(syntax(st.line, rest_col, format!("invalid parameter name `{name}`")));
                }
                let value: f64 = value.trim().parse().map_err(|_| AlgebraError::MalformedScalar {
                    text: value.trim().to_string(),
                    line: st.line,
                    column: rest_col + rest.find('=').unwrap_or(0) + 1,
                })?;
                params.insert(name.to_string(), value);
            }
            "gram" => {
                let mut entries = Vec::new();
                for tok in rest.split(|c: char| c.is_whitespace() || c == ',') {
                    if tok.is_empty() {
                        continue;
                    }
                    let value = parse_complex_literal(tok).ok_or_else(|| {
                        AlgebraError::MalformedScalar {
                            text: tok.to_string(),
                            line: st.line,
                            column: rest_col,
                        }
                    })?;
                    entries.push(value);
                }
                gram = Some(entries);
            }
            "gen" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                match toks.as_slice() {
                    [name] => gens.push((name.to_string(), None, st.line, st.column)),
                    [name, "adj", adj] => {
                        gens.push((name.to_string(), Some(adj.to_string()), st.line, st.column))
                    }
                    _ => {
                        return Err(syntax(st.line, rest_col, "expected `gen <name> [adj <name>]`"))
                    }
                }
            }
            "rule" => rules.push((st, rest_col)),
            other => {
                return Err(syntax(
                    st.line,
                    st.column,
                    format!("unknown statement `{other}`"),
                ))
            }
        }
    }

    let (tag, class_line, class_col) = class.unwrap_or((ClassTag::Custom, 1, 1));
    if tag.is_preset() {
        if let Some((_, _, line, col)) = gens.first() {
            return Err(syntax(*line, *col, format!("class {tag} does not accept `gen`")));
        }
        if let Some((st, _)) = rules.first() {
            return Err(syntax(st.line, st.column, format!("class {tag} does not accept `rule`")));
        }
        let n = modes.ok_or_else(|| syntax(class_line, class_col, format!("class {tag} needs `modes <n>`")))?;
        if tag != ClassTag::GramBoltzmann && gram.is_some() {
            return Err(syntax(class_line, class_col, "`gram` is only valid for gram_boltzmann"));
        }
        let mut p = Presentation::preset(tag, n, index_base, params, gram)?;
        p.set_step_budget(budget);
        return Ok(p);
    }

    let mut p = Presentation::custom();
    p.set_index_base(index_base);
    p.set_step_budget(budget);
    for (name, value) in params {
        p.set_param_raw(&name, value);
    }
    for (name, adj, line, col) in gens {
        p.add_generator(&name, adj.as_deref()).map_err(|e| match e {
            AlgebraError::InvalidPresentation(msg) => syntax(line, col, msg),
            other => other,
        })?;
    }
    for (st, col) in rules {
        let rest = st.text["rule".len()..].trim_start();
        let (left, right) = rest
            .split_once("->")
            .ok_or_else(|| syntax(st.line, col, "expected `rule <word> -> <polynomial>`"))?;
        let right_col = col + left.chars().count() + 2;
        let rule = parse_rule(left, right, &p, st.line, right_col)?;
        p.insert_rule(rule);
    }
    Ok(p)
}

pub(crate) fn parse_rule(
    left: &str,
    right: &str,
    pres: &Presentation,
    line: usize,
    right_col: usize,
) -> Result<Rule, AlgebraError> {
    let lhs = parse_expression(left, pres)?;
    let word = match lhs.terms().iter().next() {
        Some((w, c)) if lhs.len() == 1 && *c == Complex64::new(1.0, 0.0) && w.len() == 2 => {
            w.clone()
        }
        _ => {
            return Err(syntax(
                line,
                1,
                format!("rule left side `{}` must be a two-letter word", left.trim()),
            ))
        }
    };
    let rhs = ExprParser::new(right, pres, line, right_col).parse_all()?;
    Ok(Rule {
        left: [word.letters()[0], word.letters()[1]],
        right: rhs,
        right_text: Some(right.trim().to_string()),
    })
}

/// Parses an expression over `pres` without reducing it.
pub fn parse_expression(text: &str, pres: &Presentation) -> Result<Polynomial, AlgebraError> {
    ExprParser::new(text, pres, 1, 1).parse_all()
}

struct ExprParser<'a> {
    chars: Vec<char>,
    pos: usize,
    pres: &'a Presentation,
    line: usize,
    col0: usize,
    names: Vec<(Vec<char>, GenId)>,
}

impl<'a> ExprParser<'a> {
    fn new(text: &str, pres: &'a Presentation, line: usize, col0: usize) -> Self {
        let mut names: Vec<(Vec<char>, GenId)> = pres
            .generators()
            .iter()
            .enumerate()
            .map(|(i, g)| (g.name.chars().collect(), i as GenId))
            .collect();
        names.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
        ExprParser {
            chars: text.chars().collect(),
            pos: 0,
            pres,
            line,
            col0,
            names,
        }
    }

    fn column(&self) -> usize {
        self.col0 + self.pos
    }

    fn err(&self, message: impl Into<String>) -> AlgebraError {
        syntax(self.line, self.column(), message)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn parse_all(mut self) -> Result<Polynomial, AlgebraError> {
        if self.peek().is_none() {
            return Err(self.err("empty expression"));
        }
        let p = self.expr()?;
        if let Some(c) = self.peek() {
            return Err(self.err(format!("unexpected `{c}`")));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.add(&t)?;
                }
                Some('-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.sub(&t)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_atom(&self, c: char) -> bool {
        is_ident_start(c) || c.is_ascii_digit() || c == '.' || c == '(' || self.match_generator().is_some()
    }

    fn term(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = acc.multiply(&f)?;
                }
                Some(c) if self.starts_atom(c) => {
                    let f = self.factor()?;
                    acc = acc.multiply(&f)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial, AlgebraError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(self.factor()?.scale(Complex64::new(-1.0, 0.0)))
            }
            Some('+') => {
                self.pos += 1;
                self.factor()
            }
            _ => {
                let mut base = self.atom()?;
                loop {
                    match self.chars.get(self.pos).copied() {
                        Some('\'') | Some('†') => {
                            self.pos += 1;
                            base = self.pres.adjoint(&base);
                        }
                        Some('^') => {
                            self.pos += 1;
                            self.skip_ws();
                            let start = self.pos;
                            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                                self.pos += 1;
                            }
                            let digits: String = self.chars[start..self.pos].iter().collect();
                            let k: u32 = digits
                                .parse()
                                .map_err(|_| self.err("`^` expects a nonnegative integer"))?;
                            let mut out = self.pres.one();
                            for _ in 0..k {
                                out = out.multiply(&base)?;
                            }
                            base = out;
                        }
                        _ => return Ok(base),
                    }
                }
            }
        }
    }

    fn match_generator(&self) -> Option<(usize, GenId)> {
        let rest = &self.chars[self.pos.min(self.chars.len())..];
        for (name, id) in &self.names {
            if rest.len() >= name.len() && rest[..name.len()] == name[..] {
                let last = *name.last().unwrap();
                let next = rest.get(name.len()).copied();
                let boundary = match next {
                    Some(c) => !(is_ident_char(last) && is_ident_char(c)),
                    None => true,
                };
                if boundary {
                    return Some((name.len(), *id));
                }
            }
        }
        None
    }

    fn atom(&mut self) -> Result<Polynomial, AlgebraError> {
        let c = self
            .peek()
            .ok_or_else(|| self.err("unexpected end of expression"))?;
        if c == '(' {
            self.pos += 1;
            let inner = self.expr()?;
            if self.peek() != Some(')') {
                return Err(self.err("expected `)`"));
            }
            self.pos += 1;
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if let Some((len, id)) = self.match_generator() {
            self.pos += len;
            return Ok(self.pres.word_poly(super::Word::letter(id)));
        }
        if is_ident_start(c) {
            let start = self.pos;
            while self.pos < self.chars.len() && is_ident_char(self.chars[self.pos]) {
                self.pos += 1;
            }
            let ident: String = self.chars[start..self.pos].iter().collect();
            if ident == "i" {
                return Ok(self.pres.scalar(Complex64::new(0.0, 1.0)));
            }
            if let Some(v) = self.pres.param(&ident) {
                return Ok(self.pres.scalar(Complex64::new(v, 0.0)));
            }
            return Err(AlgebraError::UnknownSymbol {
                symbol: ident,
                line: self.line,
                column: self.col0 + start,
            });
        }
        Err(self.err(format!("unexpected `{c}`")))
    }

    fn number(&mut self) -> Result<Polynomial, AlgebraError> {
        let start = self.pos;
        let n = self.chars.len();
        while self.pos < n && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '.') {
            self.pos += 1;
        }
        if self.pos < n && matches!(self.chars[self.pos], 'e' | 'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < n && matches!(self.chars[self.pos], '+' | '-') {
                self.pos += 1;
            }
            let digits_start = self.pos;
            while self.pos < n && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits_start {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let malformed = |p: &Self| AlgebraError::MalformedScalar {
            text: {
                let mut end = p.pos;
                while end < n && (is_ident_char(p.chars[end]) || p.chars[end] == '.') {
                    end += 1;
                }
                p.chars[start..end].iter().collect()
            },
            line: p.line,
            column: p.col0 + start,
        };
        let value: f64 = text.parse().map_err(|_| malformed(self))?;
        let imaginary = self.pos < n
            && self.chars[self.pos] == 'i'
            && !self.chars.get(self.pos + 1).copied().is_some_and(is_ident_char);
        if imaginary {
            self.pos += 1;
            return Ok(self.pres.scalar(Complex64::new(0.0, value)));
        }
        if self.pos < n && (self.chars[self.pos] == '.' || self.chars[self.pos].is_ascii_digit()) {
            return Err(malformed(self));
        }
        Ok(self.pres.scalar(Complex64::new(value, 0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Word;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn boltzmann_two_modes() {
        let p = parse_presentation("class boltzmann; modes 2").unwrap();
        assert_eq!(p.generators().len(), 4);
        assert_eq!(p.rules().len(), 4);
        for r in p.rules() {
            let i = p.generators()[r.left[0] as usize].index;
            let j = p.generators()[r.left[1] as usize].index;
            let expected = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
            assert_eq!(r.right.constant_term(), expected);
            assert!(r.right.degree() == 0);
        }
    }

    #[test]
    fn ccr_one_mode_rule() {
        let p = parse_presentation("class ccr; modes 1; param h=1").unwrap();
        assert_eq!(p.rules().len(), 1);
        let r = &p.rules()[0];
        assert_eq!(p.word_to_string(&r.left_word()), "p q");
        let q = p.generator_id("q").unwrap();
        let pp = p.generator_id("p").unwrap();
        assert_eq!(r.right.coefficient(&Word::from_letters(vec![q, pp])), c(1.0, 0.0));
        assert_eq!(r.right.constant_term(), c(0.0, -1.0));
    }

    #[test]
    fn ccr_rule_count_multi_mode() {
        let p = parse_presentation("class ccr\nmodes 3\nparam h=0.5").unwrap();
        // n^2 mixed rules plus two triangles of sorting rules
        assert_eq!(p.rules().len(), 9 + 3 + 3);
    }

    #[test]
    fn custom_counterexample_algebra() {
        let p = parse_presentation("class custom; gen a adj a*; rule a a* -> a* a - 1").unwrap();
        assert_eq!(p.generators().len(), 2);
        let a = p.generator_id("a").unwrap();
        let ad = p.generator_id("a*").unwrap();
        assert_eq!(p.partner(a), ad);
        assert_eq!(p.partner(ad), a);
        let r = &p.rules()[0];
        assert_eq!(r.left, [a, ad]);
        assert_eq!(r.right.constant_term(), c(-1.0, 0.0));
        assert_eq!(r.right.coefficient(&Word::from_letters(vec![ad, a])), c(1.0, 0.0));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_presentation("class ccr\nmodes 1\nparam h=1\nfrobnicate 3").unwrap_err();
        match err {
            AlgebraError::Syntax { line, column, .. } => assert_eq!((line, column), (4, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_generator_rejected() {
        let err = parse_presentation("gen x\ngen x").unwrap_err();
        assert!(matches!(err, AlgebraError::DuplicateGenerator(ref n) if n == "x"));
    }

    #[test]
    fn non_hermitian_gram_rejected() {
        let err = parse_presentation("class gram_boltzmann; modes 2; gram 1 0.5 0.2 1").unwrap_err();
        assert!(matches!(err, AlgebraError::NonHermitianGram { .. }));
        let ok = parse_presentation("class gram_boltzmann; modes 2; gram 1 0.5i -0.5i 1").unwrap();
        assert_eq!(ok.rules().len(), 4);
    }

    #[test]
    fn unknown_class_rejected() {
        assert!(matches!(
            parse_presentation("class fermion; modes 1"),
            Err(AlgebraError::UnknownClass(t)) if t == "fermion"
        ));
    }

    #[test]
    fn expression_parses() {
        let b = parse_presentation("class boltzmann; modes 2").unwrap();
        let x = parse_expression("A1 * A1'", &b).unwrap();
        let a1 = b.generator_id("A1").unwrap();
        let a1d = b.generator_id("A1†").unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(x.coefficient(&Word::from_letters(vec![a1, a1d])), c(1.0, 0.0));

        let ccr = parse_presentation("class ccr; modes 1; param h=1").unwrap();
        let s = parse_expression("q + p", &ccr).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.terms().values().all(|v| *v == c(1.0, 0.0)));
        let t = parse_expression("2i * q", &ccr).unwrap();
        assert_eq!(t.coefficient(&Word::letter(0)), c(0.0, 2.0));
    }

    #[test]
    fn expression_errors() {
        let ccr = parse_presentation("class ccr; modes 1; param h=1").unwrap();
        assert!(matches!(
            parse_expression("q + z", &ccr),
            Err(AlgebraError::UnknownSymbol { symbol, .. }) if symbol == "z"
        ));
        assert!(matches!(
            parse_expression("1.2.3 * q", &ccr),
            Err(AlgebraError::MalformedScalar { .. })
        ));
    }

    #[test]
    fn params_and_powers_in_expressions() {
        let ccr = parse_presentation("class ccr; modes 1; param h=0.25").unwrap();
        let x = parse_expression("(q + p)^2 - h", &ccr).unwrap();
        assert_eq!(x.len(), 5);
        assert_eq!(x.constant_term(), c(-0.25, 0.0));
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex_literal("0.5+0.25i"), Some(c(0.5, 0.25)));
        assert_eq!(parse_complex_literal("1-i"), Some(c(1.0, -1.0)));
        assert_eq!(parse_complex_literal("-2i"), Some(c(0.0, -2.0)));
        assert_eq!(parse_complex_literal("1e-3"), Some(c(1e-3, 0.0)));
        assert_eq!(parse_complex_literal("2e-1+1e+0i"), Some(c(0.2, 1.0)));
        assert_eq!(parse_complex_literal("abc"), None);
    }
}
