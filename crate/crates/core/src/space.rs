//! Discrete action spaces with a stable index/string bijection.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    actions: Vec<String>,
    index: HashMap<String, usize>,
}

impl ActionSpace {
    /// Builds a space from unique action names. Indices follow the input order.
    pub fn new<I, S>(actions: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let actions: Vec<String> = actions.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(actions.len());
        for (ix, a) in actions.iter().enumerate() {
            if index.insert(a.clone(), ix).is_some() {
                return Err(Error::Config(format!("duplicate action `{a}`")));
            }
        }
        if actions.is_empty() {
            return Err(Error::Config("action space must not be empty".into()));
        }
        Ok(Self { actions, index })
    }

    /// Registers an alternative spelling that resolves to an existing action.
    /// `ix_to_action` keeps returning the canonical name.
    pub fn with_alias(mut self, alias: impl Into<String>, canonical: &str) -> Result<Self> {
        let ix = self.action_to_ix(canonical)?;
        let alias = alias.into();
        if self.index.contains_key(&alias) {
            return Err(Error::Config(format!("duplicate action `{alias}`")));
        }
        self.index.insert(alias, ix);
        Ok(self)
    }

    pub fn action_to_ix(&self, action: &str) -> Result<usize> {
        self.index
            .get(action)
            .copied()
            .ok_or_else(|| Error::UnknownAction(action.to_string()))
    }

    pub fn ix_to_action(&self, ix: usize) -> Result<&str> {
        self.actions
            .get(ix)
            .map(String::as_str)
            .ok_or(Error::ActionOutOfRange {
                index: ix,
                size: self.actions.len(),
            })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    /// Uniformly random action index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.actions.len())
    }

    pub(crate) fn check(&self, ix: usize) -> Result<()> {
        if ix < self.actions.len() {
            Ok(())
        } else {
            Err(Error::ActionOutOfRange {
                index: ix,
                size: self.actions.len(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lookup_by_position() {
        let space = ActionSpace::new(["TAG_PER", "TAG_O"]).unwrap();
        assert_eq!(space.action_to_ix("TAG_O").unwrap(), 1);
        assert_eq!(space.ix_to_action(0).unwrap(), "TAG_PER");
    }

    #[test]
    fn unknown_action() {
        let space = ActionSpace::new(["TAG_PER", "TAG_O"]).unwrap();
        assert!(matches!(
            space.action_to_ix("TAG_XYZ"),
            Err(Error::UnknownAction(a)) if a == "TAG_XYZ"
        ));
        assert!(matches!(
            space.ix_to_action(2),
            Err(Error::ActionOutOfRange { index: 2, size: 2 })
        ));
    }

    #[test]
    fn duplicates_rejected() {
        assert!(ActionSpace::new(["A", "A"]).is_err());
        assert!(ActionSpace::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn aliases_share_index() {
        let space = ActionSpace::new(["ANS", "CONT"])
            .unwrap()
            .with_alias("ANSWER", "ANS")
            .unwrap();
        assert_eq!(space.action_to_ix("ANSWER").unwrap(), 0);
        assert_eq!(space.ix_to_action(0).unwrap(), "ANS");
        assert_eq!(space.len(), 2);
    }

    proptest! {
        #[test]
        fn bijection(names in proptest::collection::btree_set("[a-z]{1,6}", 1..20)) {
            let space = ActionSpace::new(names.iter().cloned()).unwrap();
            for i in 0..space.len() {
                let a = space.ix_to_action(i).unwrap().to_string();
                prop_assert_eq!(space.action_to_ix(&a).unwrap(), i);
            }
            for a in &names {
                let ix = space.action_to_ix(a).unwrap();
                prop_assert_eq!(space.ix_to_action(ix).unwrap(), a.as_str());
            }
        }
    }
}
