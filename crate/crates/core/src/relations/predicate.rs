use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Relation names usable in triples and queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Predicate {
    // implementation attributes
    HasPackageName,
    HasClassName,
    HasText,
    HasContentDescription,
    IsClickable,
    IsEditable,
    IsScrollable,
    HasViewId,
    HasScreenLocation,
    // semantic content
    ContainsMoney,
    ContainsDate,
    ContainsTime,
    ContainsPhoneNumber,
    ContainsEmailAddress,
    ContainsNumber,
    ContainsPercentage,
    ContainsTemperature,
    // hierarchy
    HasParent,
    HasChild,
    HasParentText,
    HasChildText,
    HasSiblingText,
    HasListOrder,
    // spatial
    Above,
    Below,
    Left,
    Right,
    Near,
    NextTo,
}

/// What the object position of a predicate's triples holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ObjectKind {
    Node,
    String,
    Number,
    Boolean,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Category {
    Implementation,
    Semantic,
    Hierarchical,
    Spatial,
}

/// Generalizability class of a predicate. Ordered best first, so
/// `Full < Slight < Deprioritized` and the worst tier of a query is the max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Tier {
    Full,
    Slight,
    Deprioritized,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Full => "full",
            Tier::Slight => "slight",
            Tier::Deprioritized => "deprioritized",
        })
    }
}

use Predicate::*;

impl Predicate {
    pub const ALL: [Predicate; 29] = [
        HasPackageName,
        HasClassName,
        HasText,
        HasContentDescription,
        IsClickable,
        IsEditable,
        IsScrollable,
        HasViewId,
        HasScreenLocation,
        ContainsMoney,
        ContainsDate,
        ContainsTime,
        ContainsPhoneNumber,
        ContainsEmailAddress,
        ContainsNumber,
        ContainsPercentage,
        ContainsTemperature,
        HasParent,
        HasChild,
        HasParentText,
        HasChildText,
        HasSiblingText,
        HasListOrder,
        Above,
        Below,
        Left,
        Right,
        Near,
        NextTo,
    ];

    pub const SPATIAL: [Predicate; 6] = [Above, Below, Left, Right, Near, NextTo];

    /// Canonical lowerCamel name used by the query printer.
    pub fn name(self) -> &'static str {
        match self {
            HasPackageName => "hasPackageName",
            HasClassName => "hasClassName",
            HasText => "hasText",
            HasContentDescription => "hasContentDescription",
            IsClickable => "isClickable",
            IsEditable => "isEditable",
            IsScrollable => "isScrollable",
            HasViewId => "hasViewId",
            HasScreenLocation => "hasScreenLocation",
            ContainsMoney => "containsMoney",
            ContainsDate => "containsDate",
            ContainsTime => "containsTime",
            ContainsPhoneNumber => "containsPhoneNumber",
            ContainsEmailAddress => "containsEmailAddress",
            ContainsNumber => "containsNumber",
            ContainsPercentage => "containsPercentage",
            ContainsTemperature => "containsTemperature",
            HasParent => "hasParent",
            HasChild => "hasChild",
            HasParentText => "hasParentText",
            HasChildText => "hasChildText",
            HasSiblingText => "hasSiblingText",
            HasListOrder => "hasListOrder",
            Above => "above",
            Below => "below",
            Left => "left",
            Right => "right",
            Near => "near",
            NextTo => "nextTo",
        }
    }

    /// Case-insensitive lookup that also accepts upper-snake aliases
    /// (`HAS_CLASS_NAME`, `NEXT_TO`).
    pub fn from_name(name: &str) -> Option<Predicate> {
        let folded: String = name.chars().filter(|c| *c != '_').flat_map(char::to_lowercase).collect();
        Predicate::ALL.into_iter().find(|p| p.name().to_ascii_lowercase() == folded)
    }

    pub fn object_kind(self) -> ObjectKind {
        match self {
            HasPackageName | HasClassName | HasText | HasContentDescription | HasViewId => ObjectKind::String,
            IsClickable | IsEditable | IsScrollable => ObjectKind::Boolean,
            HasScreenLocation => ObjectKind::Rect,
            ContainsMoney | ContainsNumber | ContainsPercentage | ContainsTemperature | HasListOrder => {
                ObjectKind::Number
            }
            ContainsDate | ContainsTime | ContainsPhoneNumber | ContainsEmailAddress => ObjectKind::String,
            HasParentText | HasChildText | HasSiblingText => ObjectKind::String,
            HasParent | HasChild | Above | Below | Left | Right | Near | NextTo => ObjectKind::Node,
        }
    }

    pub fn category(self) -> Category {
        match self {
            HasPackageName | HasClassName | IsClickable | IsEditable | IsScrollable | HasViewId
            | HasScreenLocation => Category::Implementation,
            HasText | HasContentDescription | ContainsMoney | ContainsDate | ContainsTime | ContainsPhoneNumber
            | ContainsEmailAddress | ContainsNumber | ContainsPercentage | ContainsTemperature => Category::Semantic,
            HasParent | HasChild | HasParentText | HasChildText | HasSiblingText | HasListOrder => {
                Category::Hierarchical
            }
            Above | Below | Left | Right | Near | NextTo => Category::Spatial,
        }
    }

    pub fn tier(self) -> Tier {
        match self {
            HasViewId | HasScreenLocation => Tier::Deprioritized,
            ContainsNumber | ContainsPercentage | ContainsTemperature | HasSiblingText | HasListOrder | Near
            | NextTo | HasContentDescription | IsClickable | IsEditable | IsScrollable => Tier::Slight,
            _ => Tier::Full,
        }
    }

    pub fn is_node_relation(self) -> bool {
        self.object_kind() == ObjectKind::Node
    }

    /// Relation holding in the opposite direction, for node relations that have one.
    pub fn inverse(self) -> Option<Predicate> {
        match self {
            Above => Some(Below),
            Below => Some(Above),
            Left => Some(Right),
            Right => Some(Left),
            Near => Some(Near),
            NextTo => Some(NextTo),
            HasParent => Some(HasChild),
            HasChild => Some(HasParent),
            _ => None,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPredicate(pub String);

impl fmt::Display for UnknownPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown predicate `{}`", self.0)
    }
}

impl std::error::Error for UnknownPredicate {}

impl FromStr for Predicate {
    type Err = UnknownPredicate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Predicate::from_name(s).ok_or_else(|| UnknownPredicate(s.to_string()))
    }
}
