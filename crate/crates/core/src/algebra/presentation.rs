use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{Polynomial, SpaceId};
use super::word::{GenId, Word};
use super::{dsl, AlgebraError};

/// Default rewrite-step budget for custom presentations.
pub const DEFAULT_STEP_BUDGET: usize = 100_000;

/// Relation family of a presentation. Preset tags expand to fixed rule sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    /// `A_i A_j† = δ_ij`
    Boltzmann,
    /// `[p_i, q_j] = -i h δ_ij`, PBW ordering q-block before p-block.
    Ccr,
    /// `A_i A_j† = g_ij` for a Hermitian Gram matrix `g`.
    GramBoltzmann,
    /// Self-adjoint commuting generators.
    Commutative,
    Custom,
}

impl ClassTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassTag::Boltzmann => "boltzmann",
            ClassTag::Ccr => "ccr",
            ClassTag::GramBoltzmann => "gram_boltzmann",
            ClassTag::Commutative => "commutative",
            ClassTag::Custom => "custom",
        }
    }

    pub fn parse(tag: &str) -> Option<ClassTag> {
        Some(match tag {
            "boltzmann" => ClassTag::Boltzmann,
            "ccr" => ClassTag::Ccr,
            "gram_boltzmann" => ClassTag::GramBoltzmann,
            "commutative" => ClassTag::Commutative,
            "custom" => ClassTag::Custom,
            _ => return None,
        })
    }

    pub fn is_preset(self) -> bool {
        self != ClassTag::Custom
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSymbol {
    pub name: String,
    /// Mode index for preset generators; declaration position for custom ones.
    pub index: u32,
    /// Name of the adjoint partner; `None` means self-adjoint.
    pub adjoint: Option<String>,
}

/// Rewrite rule `left -> right`; the left side is always a two-letter word.
#[derive(Clone, Debug)]
pub struct Rule {
    pub left: [GenId; 2],
    pub right: Polynomial,
    /// Source text of the right side for custom rules, re-parsed when
    /// parameters change.
    pub(crate) right_text: Option<String>,
}

impl Rule {
    pub fn left_word(&self) -> Word {
        Word::from_letters(self.left.to_vec())
    }
}

/// A finitely presented *-algebra.
#[derive(Clone, Debug)]
pub struct Presentation {
    class: ClassTag,
    modes: usize,
    index_base: u32,
    generators: Vec<GeneratorSymbol>,
    partner: Vec<GenId>,
    rules: Vec<Rule>,
    rule_lookup: HashMap<(GenId, GenId), usize>,
    params: BTreeMap<String, f64>,
    gram: Option<Vec<Complex64>>,
    space: SpaceId,
    step_budget: usize,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn mode_name(stem: &str, mode: usize, modes: usize, base: u32) -> String {
    if modes == 1 {
        stem.to_string()
    } else {
        format!("{stem}{}", mode as u32 + base)
    }
}

impl Presentation {
    fn empty(class: ClassTag) -> Self {
        Presentation {
            class,
            modes: 0,
            index_base: 1,
            generators: Vec::new(),
            partner: Vec::new(),
            rules: Vec::new(),
            rule_lookup: HashMap::new(),
            params: BTreeMap::new(),
            gram: None,
            space: SpaceId(0),
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    /// Quantum Boltzmann algebra on `modes` annihilators `A_i` with `A_i A_j† = δ_ij`.
    pub fn boltzmann(modes: usize) -> Result<Self, AlgebraError> {
        Self::preset(ClassTag::Boltzmann, modes, 1, BTreeMap::new(), None)
    }

    /// Heisenberg algebra on `modes` pairs `q_i, p_i` with `[p_i, q_j] = -i h δ_ij`.
    pub fn ccr(modes: usize, h: f64) -> Result<Self, AlgebraError> {
        let params = BTreeMap::from([("h".to_string(), h)]);
        Self::preset(ClassTag::Ccr, modes, 1, params, None)
    }

    /// Boltzmann-type algebra with `A_i A_j† = g_ij`, `gram` row-major.
    pub fn gram_boltzmann(modes: usize, gram: Vec<Complex64>) -> Result<Self, AlgebraError> {
        Self::preset(ClassTag::GramBoltzmann, modes, 1, BTreeMap::new(), Some(gram))
    }

    pub fn commutative(modes: usize) -> Result<Self, AlgebraError> {
        Self::preset(ClassTag::Commutative, modes, 1, BTreeMap::new(), None)
    }

    /// Starts an empty custom presentation; add generators and rules next.
    pub fn custom() -> Self {
        let mut p = Self::empty(ClassTag::Custom);
        p.refresh_space();
        p
    }

    pub(crate) fn preset(
        class: ClassTag,
        modes: usize,
        index_base: u32,
        params: BTreeMap<String, f64>,
        gram: Option<Vec<Complex64>>,
    ) -> Result<Self, AlgebraError> {
        if !class.is_preset() {
            return Err(AlgebraError::InvalidPresentation(
                "custom presentations are built statement by statement".into(),
            ));
        }
        if modes == 0 {
            return Err(AlgebraError::InvalidPresentation(
                "preset classes need at least one mode".into(),
            ));
        }
        let mut p = Self::empty(class);
        p.modes = modes;
        p.index_base = index_base;
        p.params = params;
        match class {
            ClassTag::Boltzmann | ClassTag::GramBoltzmann => {
                for i in 0..modes {
                    let a = mode_name("A", i, modes, index_base);
                    let ad = format!("{a}†");
                    p.push_generator(&a, i as u32, Some(&ad))?;
                    p.push_generator(&ad, i as u32, Some(&a))?;
                }
            }
            ClassTag::Ccr => {
                if !p.params.contains_key("h") {
                    return Err(AlgebraError::InvalidPresentation(
                        "ccr presentations need `param h=<real>`".into(),
                    ));
                }
                for i in 0..modes {
                    p.push_generator(&mode_name("q", i, modes, index_base), i as u32, None)?;
                }
                for i in 0..modes {
                    p.push_generator(&mode_name("p", i, modes, index_base), i as u32, None)?;
                }
            }
            ClassTag::Commutative => {
                for i in 0..modes {
                    p.push_generator(&mode_name("x", i, modes, index_base), i as u32, None)?;
                }
            }
            ClassTag::Custom => unreachable!(),
        }
        p.relink_partners();
        if class == ClassTag::GramBoltzmann {
            let g = gram.ok_or_else(|| {
                AlgebraError::InvalidPresentation("gram_boltzmann needs a `gram` statement".into())
            })?;
            if g.len() != modes * modes {
                return Err(AlgebraError::InvalidPresentation(format!(
                    "gram matrix needs {} entries, got {}",
                    modes * modes,
                    g.len()
                )));
            }
            for i in 0..modes {
                for j in 0..modes {
                    if (g[i * modes + j] - g[j * modes + i].conj()).norm() > 1e-12 {
                        return Err(AlgebraError::NonHermitianGram { row: i, col: j });
                    }
                }
            }
            for i in 0..modes {
                for j in 0..modes {
                    p.params.insert(format!("g{i}_{j}_re"), g[i * modes + j].re);
                    p.params.insert(format!("g{i}_{j}_im"), g[i * modes + j].im);
                }
            }
            p.gram = Some(g);
        }
        p.refresh_space();
        p.expand_preset_rules();
        Ok(p)
    }

    fn expand_preset_rules(&mut self) {
        let n = self.modes;
        let space = self.space;
        let one = |c: Complex64| Polynomial::scalar(space, c);
        let mut rules = Vec::new();
        match self.class {
            ClassTag::Boltzmann | ClassTag::GramBoltzmann => {
                for i in 0..n {
                    for j in 0..n {
                        let value = match &self.gram {
                            Some(g) => g[i * n + j],
                            None if i == j => Complex64::new(1.0, 0.0),
                            None => Complex64::default(),
                        };
                        rules.push(Rule {
                            left: [(2 * i) as GenId, (2 * j + 1) as GenId],
                            right: one(value),
                            right_text: None,
                        });
                    }
                }
            }
            ClassTag::Ccr => {
                let h = self.params["h"];
                let q = |i: usize| i as GenId;
                let p = |i: usize| (n + i) as GenId;
                for i in 0..n {
                    for j in 0..n {
                        let mut right = Polynomial::monomial(
                            space,
                            Word::from_letters(vec![q(j), p(i)]),
                            Complex64::new(1.0, 0.0),
                        );
                        if i == j {
                            right.add_term(Word::unit(), Complex64::new(0.0, -h));
                        }
                        rules.push(Rule {
                            left: [p(i), q(j)],
                            right,
                            right_text: None,
                        });
                    }
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        rules.push(swap_rule(space, q(j), q(i)));
                    }
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        rules.push(swap_rule(space, p(j), p(i)));
                    }
                }
            }
            ClassTag::Commutative => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        rules.push(swap_rule(space, j as GenId, i as GenId));
                    }
                }
            }
            ClassTag::Custom => return,
        }
        self.rules.clear();
        self.rule_lookup.clear();
        for r in rules {
            self.insert_rule(r);
        }
    }

    fn refresh_space(&mut self) {
        let mut buf = String::new();
        for g in &self.generators {
            buf.push_str(&g.name);
            buf.push('\u{1}');
            if let Some(a) = &g.adjoint {
                buf.push_str(a);
            }
            buf.push('\u{2}');
        }
        self.space = SpaceId(fnv1a(buf.as_bytes()));
    }

    fn push_generator(
        &mut self,
        name: &str,
        index: u32,
        adjoint: Option<&str>,
    ) -> Result<(), AlgebraError> {
        if self.generators.iter().any(|g| g.name == name) {
            return Err(AlgebraError::DuplicateGenerator(name.to_string()));
        }
        self.generators.push(GeneratorSymbol {
            name: name.to_string(),
            index,
            adjoint: adjoint.map(str::to_string),
        });
        self.partner.push(self.generators.len() as GenId - 1);
        Ok(())
    }

    /// Declares a custom generator. Declaring `a adj b` also declares `b`
    /// (with partner `a`) unless it already exists.
    pub fn add_generator(&mut self, name: &str, adjoint: Option<&str>) -> Result<(), AlgebraError> {
        if self.class != ClassTag::Custom {
            return Err(AlgebraError::InvalidPresentation(format!(
                "generators of class {} are fixed by the preset",
                self.class
            )));
        }
        if !self.rules.is_empty() {
            return Err(AlgebraError::InvalidPresentation(
                "generators must be declared before rules".into(),
            ));
        }
        dsl::check_generator_name(name)?;
        let index = self.generators.len() as u32;
        match adjoint {
            None => self.push_generator(name, index, None)?,
            Some(adj) if adj == name => self.push_generator(name, index, None)?,
            Some(adj) => {
                dsl::check_generator_name(adj)?;
                match self.generators.iter().position(|g| g.name == adj) {
                    Some(existing) => {
                        let declared = self.generators[existing].adjoint.clone();
                        if declared.as_deref() != Some(name) {
                            return Err(AlgebraError::DuplicateGenerator(adj.to_string()));
                        }
                        self.push_generator(name, index, Some(adj))?;
                    }
                    None => {
                        self.push_generator(name, index, Some(adj))?;
                        self.push_generator(adj, index + 1, Some(name))?;
                    }
                }
            }
        }
        self.relink_partners();
        self.refresh_space();
        Ok(())
    }

    fn relink_partners(&mut self) {
        for (i, g) in self.generators.iter().enumerate() {
            self.partner[i] = match &g.adjoint {
                Some(a) => self
                    .generators
                    .iter()
                    .position(|h| &h.name == a)
                    .map(|k| k as GenId)
                    .unwrap_or(i as GenId),
                None => i as GenId,
            };
        }
    }

    /// Adds a custom rule from text, e.g. `("a a*", "a* a - 1")`.
    pub fn add_rule(&mut self, left: &str, right: &str) -> Result<(), AlgebraError> {
        if self.class != ClassTag::Custom {
            return Err(AlgebraError::InvalidPresentation(format!(
                "rules of class {} are fixed by the preset",
                self.class
            )));
        }
        let rule = dsl::parse_rule(left, right, self, 1, 1)?;
        self.insert_rule(rule);
        Ok(())
    }

    pub(crate) fn insert_rule(&mut self, rule: Rule) {
        let key = (rule.left[0], rule.left[1]);
        self.rule_lookup.entry(key).or_insert(self.rules.len());
        self.rules.push(rule);
    }

    pub(crate) fn set_index_base(&mut self, base: u32) {
        self.index_base = base;
    }

    pub(crate) fn set_param_raw(&mut self, name: &str, value: f64) {
        self.params.insert(name.to_string(), value);
    }

    pub fn set_step_budget(&mut self, budget: usize) {
        self.step_budget = budget;
    }

    /// Copy of this presentation with one parameter changed; preset rules are
    /// re-expanded and custom right-hand sides re-parsed.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Presentation, AlgebraError> {
        let mut out = self.clone();
        out.params.insert(name.to_string(), value);
        if self.class.is_preset() {
            out.expand_preset_rules();
        } else {
            let rules = std::mem::take(&mut out.rules);
            out.rule_lookup.clear();
            for rule in rules {
                let rebuilt = match &rule.right_text {
                    Some(text) => Rule {
                        right: dsl::parse_expression(text, &out)?,
                        ..rule
                    },
                    None => rule,
                };
                out.insert_rule(rebuilt);
            }
        }
        Ok(out)
    }

    pub fn class(&self) -> ClassTag {
        self.class
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn index_base(&self) -> u32 {
        self.index_base
    }

    pub fn generators(&self) -> &[GeneratorSymbol] {
        &self.generators
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn gram(&self) -> Option<&[Complex64]> {
        self.gram.as_deref()
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn step_budget(&self) -> usize {
        self.step_budget
    }

    pub fn generator_id(&self, name: &str) -> Option<GenId> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as GenId)
    }

    pub fn partner(&self, id: GenId) -> GenId {
        self.partner[id as usize]
    }

    pub fn is_self_adjoint(&self, id: GenId) -> bool {
        self.partner(id) == id
    }

    pub(crate) fn rule_at(&self, a: GenId, b: GenId) -> Option<&Rule> {
        self.rule_lookup.get(&(a, b)).map(|&i| &self.rules[i])
    }

    /// True when no rule's left side occurs in `word`.
    pub fn is_irreducible(&self, word: &Word) -> bool {
        word.letters()
            .windows(2)
            .all(|pair| !self.rule_lookup.contains_key(&(pair[0], pair[1])))
    }

    pub fn one(&self) -> Polynomial {
        Polynomial::one(self.space)
    }

    pub fn zero(&self) -> Polynomial {
        Polynomial::zero(self.space)
    }

    pub fn scalar(&self, value: Complex64) -> Polynomial {
        Polynomial::scalar(self.space, value)
    }

    pub fn word_poly(&self, word: Word) -> Polynomial {
        Polynomial::monomial(self.space, word, Complex64::new(1.0, 0.0))
    }

    /// The generator named `name` as a polynomial.
    pub fn gen(&self, name: &str) -> Result<Polynomial, AlgebraError> {
        let id = self
            .generator_id(name)
            .ok_or_else(|| AlgebraError::UnknownSymbol {
                symbol: name.to_string(),
                line: 1,
                column: 1,
            })?;
        Ok(self.word_poly(Word::letter(id)))
    }

    /// Adjoint of a word: reversed, each letter replaced by its partner.
    pub fn adjoint_word(&self, word: &Word) -> Word {
        Word::from_letters(
            word.letters()
                .iter()
                .rev()
                .map(|&g| self.partner(g))
                .collect::<Vec<_>>(),
        )
    }

    /// The involution: reverses words, swaps letters with their partners and
    /// conjugates coefficients.
    pub fn adjoint(&self, x: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(x.space());
        for (w, c) in x.terms() {
            out.add_term(self.adjoint_word(w), c.conj());
        }
        out
    }

    pub fn word_to_string(&self, word: &Word) -> String {
        if word.is_empty() {
            return "1".to_string();
        }
        word.letters()
            .iter()
            .map(|&g| self.generators[g as usize].name.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn poly_to_string(&self, x: &Polynomial) -> String {
        if x.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (w, c)) in x.terms().iter().enumerate() {
            let coef = format_complex(*c);
            if i > 0 {
                out.push_str(" + ");
            }
            if w.is_empty() {
                out.push_str(&coef);
            } else if *c == Complex64::new(1.0, 0.0) {
                out.push_str(&self.word_to_string(w));
            } else {
                out.push_str(&format!("{coef}*{}", self.word_to_string(w)));
            }
        }
        out
    }

    /// Canonical DSL text for this presentation.
    pub fn to_dsl(&self) -> String {
        let mut lines = vec![format!("class {}", self.class)];
        if self.class.is_preset() {
            lines.push(format!("modes {}", self.modes));
            if self.index_base != 1 {
                lines.push(format!("index_base {}", self.index_base));
            }
        }
        for (name, value) in &self.params {
            if self.gram.is_some() && is_gram_param(name) {
                continue;
            }
            lines.push(format!("param {name}={value}"));
        }
        if let Some(g) = &self.gram {
            let entries: Vec<String> = g.iter().map(|c| format_complex(*c)).collect();
            lines.push(format!("gram {}", entries.join(" ")));
        }
        if self.class == ClassTag::Custom {
            let mut seen = vec![false; self.generators.len()];
            for (i, g) in self.generators.iter().enumerate() {
                if seen[i] {
                    continue;
                }
                let partner = self.partner[i] as usize;
                seen[i] = true;
                seen[partner] = true;
                match &g.adjoint {
                    Some(a) if partner != i => lines.push(format!("gen {} adj {a}", g.name)),
                    _ => lines.push(format!("gen {}", g.name)),
                }
            }
            if self.step_budget != DEFAULT_STEP_BUDGET {
                lines.push(format!("budget {}", self.step_budget));
            }
            for r in &self.rules {
                let right = r
                    .right_text
                    .clone()
                    .unwrap_or_else(|| self.poly_to_string(&r.right));
                lines.push(format!(
                    "rule {} -> {right}",
                    self.word_to_string(&r.left_word())
                ));
            }
        }
        lines.join("\n")
    }

    /// Stable 64-bit hash of the canonical DSL text, as lowercase hex.
    pub fn fingerprint(&self) -> String {
        format!("{:016x}", fnv1a(self.to_dsl().as_bytes()))
    }
}

fn is_gram_param(name: &str) -> bool {
    let Some(rest) = name.strip_prefix('g') else {
        return false;
    };
    let Some(rest) = rest.strip_suffix("_re").or_else(|| rest.strip_suffix("_im")) else {
        return false;
    };
    let mut parts = rest.split('_');
    matches!(
        (parts.next(), parts.next(), parts.next()),
        (Some(i), Some(j), None) if i.parse::<usize>().is_ok() && j.parse::<usize>().is_ok()
    )
}

fn swap_rule(space: SpaceId, a: GenId, b: GenId) -> Rule {
    Rule {
        left: [a, b],
        right: Polynomial::monomial(space, Word::from_letters(vec![b, a]), Complex64::new(1.0, 0.0)),
        right_text: None,
    }
}

/// Compact `a+bi` rendering used by reports and DSL output.
pub fn format_complex(c: Complex64) -> String {
    let fmt_real = |x: f64| {
        if x == x.trunc() && x.abs() < 1e15 {
            format!("{}", x as i64)
        } else {
            format!("{x}")
        }
    };
    if c.im == 0.0 {
        fmt_real(c.re)
    } else if c.re == 0.0 {
        format!("{}i", fmt_real(c.im))
    } else if c.im < 0.0 {
        format!("({}-{}i)", fmt_real(c.re), fmt_real(-c.im))
    } else {
        format!("({}+{}i)", fmt_real(c.re), fmt_real(c.im))
    }
}
