use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Const, FuncDecl, LogicError, RelDecl, Sort, Var};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub sorts: Vec<Sort>,
    pub functions: BTreeMap<Arc<str>, Arc<FuncDecl>>,
    pub relations: BTreeMap<Arc<str>, Arc<RelDecl>>,
    pub constants: BTreeMap<Arc<str>, Const>,
    pub variables: Vec<Var>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn add_sort(&mut self, s: Sort) -> Result<(), LogicError> {
        if self.sorts.contains(&s) {
            return Err(LogicError::Duplicate(format!("sort {}", s)));
        }
        self.sorts.push(s);
        Ok(())
    }

    pub fn has_sort(&self, s: &Sort) -> bool {
        self.sorts.contains(s)
    }

    fn check_sort(&self, s: &Sort) -> Result<(), LogicError> {
        if self.has_sort(s) {
            Ok(())
        } else {
            Err(LogicError::Undeclared(format!("sort {}", s)))
        }
    }

    fn check_fresh(&self, name: &str) -> Result<(), LogicError> {
        let taken = self.functions.contains_key(name)
            || self.relations.contains_key(name)
            || self.constants.contains_key(name)
            || self.variables.iter().any(|v| &*v.name == name);
        if taken {
            Err(LogicError::Duplicate(format!("symbol {}", name)))
        } else {
            Ok(())
        }
    }

    pub fn add_function(&mut self, name: &str, args: Vec<Sort>, result: Sort) -> Result<Arc<FuncDecl>, LogicError> {
        self.check_fresh(name)?;
        args.iter().chain([&result]).try_for_each(|s| self.check_sort(s))?;
        let d = Arc::new(FuncDecl { name: name.into(), args, result });
        self.functions.insert(name.into(), d.clone());
        Ok(d)
    }

    pub fn add_relation(&mut self, name: &str, args: Vec<Sort>) -> Result<Arc<RelDecl>, LogicError> {
        self.check_fresh(name)?;
        args.iter().try_for_each(|s| self.check_sort(s))?;
        let d = Arc::new(RelDecl { name: name.into(), args });
        self.relations.insert(name.into(), d.clone());
        Ok(d)
    }

    pub fn add_constant(&mut self, name: &str, sort: Sort) -> Result<Const, LogicError> {
        self.check_fresh(name)?;
        self.check_sort(&sort)?;
        let c = Const::new(name, sort);
        self.constants.insert(name.into(), c.clone());
        Ok(c)
    }

    pub fn add_variable(&mut self, name: &str, sort: Sort) -> Result<Var, LogicError> {
        self.check_fresh(name)?;
        self.check_sort(&sort)?;
        let v = Var::new(name, sort);
        self.variables.push(v.clone());
        Ok(v)
    }

    pub fn function(&self, name: &str) -> Option<&Arc<FuncDecl>> {
        self.functions.get(name)
    }

    pub fn relation(&self, name: &str) -> Option<&Arc<RelDecl>> {
        self.relations.get(name)
    }

    pub fn constant(&self, name: &str) -> Option<&Const> {
        self.constants.get(name)
    }

    pub fn variable(&self, name: &str) -> Option<&Var> {
        self.variables.iter().find(|v| &*v.name == name)
    }

    pub fn uses_rat(&self) -> bool {
        self.sorts.contains(&Sort::Rat)
    }
}
