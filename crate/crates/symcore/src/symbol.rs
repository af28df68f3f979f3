//! Process-wide symbol registry.
//!
//! Every [`Sym`] is an index into a single interned table. Registration order
//! fixes the variable enumeration used by the monomial order, so the standard
//! atoms and the coordinate symbols are registered eagerly in a fixed order.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use once_cell::sync::Lazy;

use crate::error::SymError;

/// Largest dimension for which `x1..xN` / `y1..yN` are pre-registered.
pub const MAX_DIM: usize = 12;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymKind {
    /// `x1..xn`, grade 0.
    Coordinate,
    /// `y1..yn`, grade 1.
    Fiber,
    /// Scalar atoms such as `alpha`, `r00`, `eps`; also tensor-component placeholders.
    Scalar,
    /// Free-index atoms `yi`, `bi`, `sigmai`, `si0`.
    Vector,
    /// Formal positive unit `E = e^sigma`; may carry negative exponents.
    Unit,
}

#[derive(Clone, Debug)]
pub struct SymInfo {
    pub name: String,
    pub kind: SymKind,
    pub grade: u32,
}

struct Registry {
    infos: Vec<SymInfo>,
    by_name: HashMap<String, Sym>,
}

impl Registry {
    fn insert(&mut self, name: &str, kind: SymKind, grade: u32) -> Result<Sym, SymError> {
        if let Some(&s) = self.by_name.get(name) {
            let info = &self.infos[s.0 as usize];
            if info.kind != kind || info.grade != grade {
                return Err(SymError::SymbolConflict(name.to_string()));
            }
            return Ok(s);
        }
        let s = Sym(self.infos.len() as u32);
        self.infos.push(SymInfo {
            name: name.to_string(),
            kind,
            grade,
        });
        self.by_name.insert(name.to_string(), s);
        Ok(s)
    }
}

/// Names of the standard graded atoms, in registration order.
pub const STANDARD_SCALARS: &[(&str, u32)] = &[
    ("alpha", 1),
    ("beta", 1),
    ("r00", 2),
    ("s0", 1),
    ("r0", 1),
    ("sigma0", 1),
    ("b2", 0),
    ("rho", 0),
    ("sigma", 0),
    ("eps", 0),
    ("k", 0),
    ("n", 0),
];

/// Vector atoms and their y-grades.
pub const STANDARD_VECTORS: &[(&str, u32)] = &[("si0", 1), ("yi", 1), ("bi", 0), ("sigmai", 0)];

static REGISTRY: Lazy<RwLock<Registry>> = Lazy::new(|| {
    let mut reg = Registry {
        infos: Vec::new(),
        by_name: HashMap::new(),
    };
    for &(name, grade) in STANDARD_SCALARS {
        reg.insert(name, SymKind::Scalar, grade).unwrap();
    }
    for &(name, grade) in STANDARD_VECTORS {
        reg.insert(name, SymKind::Vector, grade).unwrap();
    }
    for i in 1..=MAX_DIM {
        reg.insert(&format!("x{i}"), SymKind::Coordinate, 0).unwrap();
    }
    for i in 1..=MAX_DIM {
        reg.insert(&format!("y{i}"), SymKind::Fiber, 1).unwrap();
    }
    reg.insert("E", SymKind::Unit, 0).unwrap();
    RwLock::new(reg)
});

impl Sym {
    /// Interns `name`, or returns the existing symbol if kind and grade agree.
    pub fn intern(name: &str, kind: SymKind, grade: u32) -> Result<Sym, SymError> {
        if let Some(s) = Sym::lookup(name) {
            let info = s.info();
            if info.kind != kind || info.grade != grade {
                return Err(SymError::SymbolConflict(name.to_string()));
            }
            return Ok(s);
        }
        REGISTRY.write().unwrap().insert(name, kind, grade)
    }

    pub fn lookup(name: &str) -> Option<Sym> {
        REGISTRY.read().unwrap().by_name.get(name).copied()
    }

    pub fn info(self) -> SymInfo {
        REGISTRY.read().unwrap().infos[self.0 as usize].clone()
    }

    pub fn name(self) -> String {
        REGISTRY.read().unwrap().infos[self.0 as usize].name.clone()
    }

    pub fn kind(self) -> SymKind {
        REGISTRY.read().unwrap().infos[self.0 as usize].kind
    }

    pub fn grade(self) -> u32 {
        REGISTRY.read().unwrap().infos[self.0 as usize].grade
    }

    pub fn id(self) -> u32 {
        self.0
    }

    /// Standard atom by name; panics if `name` is not pre-registered.
    pub fn std(name: &str) -> Sym {
        Sym::lookup(name).unwrap_or_else(|| panic!("standard symbol `{name}` missing"))
    }

    /// Coordinate `x_i`, 1-based.
    pub fn x(i: usize) -> Sym {
        if (1..=MAX_DIM).contains(&i) {
            Lazy::force(&REGISTRY);
            return Sym((STANDARD_SCALARS.len() + STANDARD_VECTORS.len() + i - 1) as u32);
        }
        Sym::intern(&format!("x{i}"), SymKind::Coordinate, 0).expect("coordinate symbol")
    }

    /// Fiber coordinate `y_i`, 1-based.
    pub fn y(i: usize) -> Sym {
        if (1..=MAX_DIM).contains(&i) {
            Lazy::force(&REGISTRY);
            return Sym((STANDARD_SCALARS.len() + STANDARD_VECTORS.len() + MAX_DIM + i - 1) as u32);
        }
        Sym::intern(&format!("y{i}"), SymKind::Fiber, 1).expect("fiber symbol")
    }

    /// Tensor-component placeholder (grade 0 scalar), used by formula fixtures.
    pub fn placeholder(name: &str) -> Result<Sym, SymError> {
        Sym::intern(name, SymKind::Scalar, 0)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Shorthands for the standard atoms.
pub mod atoms {
    use super::Sym;

    pub fn alpha() -> Sym {
        Sym::std("alpha")
    }
    pub fn beta() -> Sym {
        Sym::std("beta")
    }
    pub fn b2() -> Sym {
        Sym::std("b2")
    }
    pub fn r00() -> Sym {
        Sym::std("r00")
    }
    pub fn s0() -> Sym {
        Sym::std("s0")
    }
    pub fn r0() -> Sym {
        Sym::std("r0")
    }
    pub fn sigma0() -> Sym {
        Sym::std("sigma0")
    }
    pub fn rho() -> Sym {
        Sym::std("rho")
    }
    pub fn sigma() -> Sym {
        Sym::std("sigma")
    }
    pub fn eps() -> Sym {
        Sym::std("eps")
    }
    pub fn k() -> Sym {
        Sym::std("k")
    }
    pub fn n() -> Sym {
        Sym::std("n")
    }
    pub fn unit() -> Sym {
        Sym::std("E")
    }
    pub fn yi() -> Sym {
        Sym::std("yi")
    }
    pub fn bi() -> Sym {
        Sym::std("bi")
    }
    pub fn sigmai() -> Sym {
        Sym::std("sigmai")
    }
    pub fn si0() -> Sym {
        Sym::std("si0")
    }
}

/// A named set of symbols an expression may mention.
///
/// The table is a view over the global registry: it decides which
/// identifiers the parser accepts, plus the `gamma2` macro.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    names: HashMap<String, Sym>,
    gamma2_macro: bool,
}

impl SymbolTable {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Graded atoms of the abstract reading plus the vector atoms and `E`.
    pub fn abstract_atoms() -> Self {
        let mut t = Self::empty();
        for &(name, _) in STANDARD_SCALARS.iter().chain(STANDARD_VECTORS) {
            t.add(Sym::std(name));
        }
        t.add(atoms::unit());
        t.gamma2_macro = true;
        t
    }

    /// Coordinates `x1..xn` and `y1..yn` only.
    pub fn coordinates(n: usize) -> Self {
        let mut t = Self::empty();
        t.add_coordinates(n);
        t
    }

    /// Abstract atoms together with `x1..xn`, `y1..yn`.
    pub fn full(n: usize) -> Self {
        let mut t = Self::abstract_atoms();
        t.add_coordinates(n);
        t
    }

    pub fn add_coordinates(&mut self, n: usize) {
        for i in 1..=n {
            self.add(Sym::x(i));
            self.add(Sym::y(i));
        }
    }

    pub fn add(&mut self, s: Sym) {
        self.names.insert(s.name(), s);
    }

    /// Adds (interning if needed) a grade-0 placeholder symbol.
    pub fn add_placeholder(&mut self, name: &str) -> Result<Sym, SymError> {
        let s = Sym::placeholder(name)?;
        self.add(s);
        Ok(s)
    }

    pub fn get(&self, name: &str) -> Option<Sym> {
        self.names.get(name).copied()
    }

    pub fn has_gamma2_macro(&self) -> bool {
        self.gamma2_macro
    }

    pub fn with_gamma2_macro(mut self, on: bool) -> Self {
        self.gamma2_macro = on;
        self
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> + '_ {
        self.names.values().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_shortcuts_match_registry() {
        for i in 1..=MAX_DIM {
            assert_eq!(Sym::x(i), Sym::lookup(&format!("x{i}")).unwrap());
            assert_eq!(Sym::y(i), Sym::lookup(&format!("y{i}")).unwrap());
        }
    }

    #[test]
    fn standard_grades() {
        assert_eq!(atoms::alpha().grade(), 1);
        assert_eq!(atoms::r00().grade(), 2);
        assert_eq!(atoms::b2().grade(), 0);
        assert_eq!(Sym::x(1).grade(), 0);
        assert_eq!(Sym::y(2).grade(), 1);
        assert_eq!(atoms::unit().kind(), SymKind::Unit);
    }

    #[test]
    fn conflicting_registration_is_rejected() {
        assert!(Sym::intern("alpha", SymKind::Scalar, 0).is_err());
        assert_eq!(Sym::intern("alpha", SymKind::Scalar, 1).unwrap(), atoms::alpha());
    }

    #[test]
    fn table_lookup() {
        let t = SymbolTable::full(2);
        assert_eq!(t.get("x2"), Some(Sym::x(2)));
        assert_eq!(t.get("x3"), None);
        assert!(t.has_gamma2_macro());
    }
}
