//! Name-keyed registries of interchangeable implementations.

use crate::error::{Error, Result};
use crate::model::{CubicTruncation, DelayModel, Linear, StateDependent};
use crate::normalform::{MultilinearForms, Taylor, Truncated};

pub struct Entry<T: ?Sized> {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> Box<T>,
}

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<Entry<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    pub fn register(
        &mut self,
        name: &'static str,
        description: &'static str,
        build: fn() -> Box<T>,
    ) {
        self.entries.retain(|e| e.name != name);
        self.entries.push(Entry {
            name,
            description,
            build,
        });
    }

    pub fn get(&self, name: &str) -> Result<Box<T>> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| (e.build)())
            .ok_or_else(|| Error::UnknownName {
                kind: self.kind,
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }

    pub fn entries(&self) -> &[Entry<T>] {
        &self.entries
    }
}

/// Right-hand sides the integrator can drive; `state-dependent` is the default.
pub fn delay_models() -> Registry<dyn DelayModel> {
    let mut r: Registry<dyn DelayModel> = Registry::new("model");
    r.register(StateDependent.name(), StateDependent.description(), || {
        Box::new(StateDependent)
    });
    r.register(
        CubicTruncation.name(),
        CubicTruncation.description(),
        || Box::new(CubicTruncation),
    );
    r.register(Linear.name(), Linear.description(), || Box::new(Linear));
    r
}

/// Strategies for `F2`/`F3`; `taylor` is the default.
pub fn multilinear_forms() -> Registry<dyn MultilinearForms> {
    let mut r: Registry<dyn MultilinearForms> = Registry::new("forms");
    r.register(Taylor.name(), Taylor.description(), || Box::new(Taylor));
    r.register(Truncated.name(), Truncated.description(), || {
        Box::new(Truncated)
    });
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        let m = delay_models();
        assert_eq!(m.names(), vec!["state-dependent", "cubic", "linear"]);
        assert_eq!(m.get("cubic").unwrap().name(), "cubic");
        assert!(matches!(
            m.get("nope"),
            Err(Error::UnknownName { kind: "model", .. })
        ));
        let f = multilinear_forms();
        assert_eq!(f.names(), vec!["taylor", "truncated"]);
        assert_eq!(f.get("truncated").unwrap().name(), "truncated");
    }
}
