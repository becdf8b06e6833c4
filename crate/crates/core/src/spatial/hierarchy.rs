use std::collections::HashMap;

use crate::model::{SceneObject, SceneSnapshot};

/// A scene object placed in its hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedObject<'a> {
    pub object: &'a SceneObject,
    /// Ancestor ids, nearest parent first and root last.
    pub ancestors: Vec<&'a str>,
    pub depth: usize,
    pub is_leaf: bool,
    /// Own opacity times every ancestor's opacity.
    pub effective_opacity: f64,
}

impl ResolvedObject<'_> {
    pub fn id(&self) -> &str {
        &self.object.id
    }

    pub fn is_ancestor_of(&self, other: &ResolvedObject<'_>) -> bool {
        other.ancestors.contains(&self.object.id.as_str())
    }

    pub fn related_to(&self, other: &ResolvedObject<'_>) -> bool {
        self.is_ancestor_of(other) || other.is_ancestor_of(self)
    }
}

/// Expands a validated snapshot into one [`ResolvedObject`] per object, in
/// input order.
pub fn expand_hierarchy(snapshot: &SceneSnapshot) -> Vec<ResolvedObject<'_>> {
    let by_id: HashMap<&str, &SceneObject> = snapshot
        .objects
        .iter()
        .map(|o| (o.id.as_str(), o))
        .collect();
    let mut has_children: HashMap<&str, bool> = HashMap::new();
    for obj in &snapshot.objects {
        if let Some(parent) = obj.parent_id.as_deref() {
            has_children.insert(parent, true);
        }
    }

    snapshot
        .objects
        .iter()
        .map(|obj| {
            let mut ancestors = Vec::new();
            let mut opacity = obj.opacity;
            let mut cursor = obj.parent_id.as_deref();
            while let Some(pid) = cursor {
                // Validation guarantees the chain is finite and resolvable.
                let Some(parent) = by_id.get(pid) else { break };
                if ancestors.len() > snapshot.objects.len() {
                    break;
                }
                ancestors.push(parent.id.as_str());
                opacity *= parent.opacity;
                cursor = parent.parent_id.as_deref();
            }
            ResolvedObject {
                object: obj,
                depth: ancestors.len(),
                ancestors,
                is_leaf: !has_children.contains_key(obj.id.as_str()),
                effective_opacity: opacity,
            }
        })
        .collect()
}
