//! Prompt assembly for the instantiation experiments.
//!
//! Nine experiment arms toggle four kinds of engineering knowledge:
//!
//! | arm | example | context | domain | pattern |
//! |-----|---------|---------|--------|---------|
//! | E1  |         |         |        |         |
//! | E2  | x       | x       | x      | x       |
//! | E3  |         | x       | x      | x       |
//! | E4  | x       | x       |        | x       |
//! | E5  |         | x       |        | x       |
//! | E6  | x       |         | x      | x       |
//! | E7  |         |         | x      | x       |
//! | E8  | x       |         |        | x       |
//! | E9  |         |         |        | x       |
//!
//! E1 is the bare baseline: no pattern, no added knowledge, just the
//! fixed request. Every other arm receives the pattern in predicate form
//! together with the production rules for reading it. Knowledge blocks
//! are wrapped in `@NAME` / `@END_NAME` sentinel lines and appear in a
//! fixed order, so prompts are byte-stable for identical inputs.

use serde::{Deserialize, Serialize};

/// The assistant role line shared by every arm.
pub const SYSTEM_PREAMBLE: &str = "You are an assistant who assists in developing an assurance case in a tree structure using Goal Structuring Notation (GSN). Your role is to create an assurance case.";

pub const RULES_SENTINEL: &str = "RULES";
pub const CONTEXT_SENTINEL: &str = "CONTEXT";
pub const DOMAIN_SENTINEL: &str = "DOMAIN";
pub const EXAMPLE_SENTINEL: &str = "EXAMPLE";
pub const PATTERN_SENTINEL: &str = "PATTERN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
    E8,
    E9,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::E1,
        ExperimentId::E2,
        ExperimentId::E3,
        ExperimentId::E4,
        ExperimentId::E5,
        ExperimentId::E6,
        ExperimentId::E7,
        ExperimentId::E8,
        ExperimentId::E9,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ExperimentId::E1 => "E1",
            ExperimentId::E2 => "E2",
            ExperimentId::E3 => "E3",
            ExperimentId::E4 => "E4",
            ExperimentId::E5 => "E5",
            ExperimentId::E6 => "E6",
            ExperimentId::E7 => "E7",
            ExperimentId::E8 => "E8",
            ExperimentId::E9 => "E9",
        }
    }

    pub fn parse(text: &str) -> Option<ExperimentId> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.code().eq_ignore_ascii_case(text.trim()))
    }

    /// One-shot worked example from another system.
    pub fn uses_example(self) -> bool {
        matches!(
            self,
            ExperimentId::E2 | ExperimentId::E4 | ExperimentId::E6 | ExperimentId::E8
        )
    }

    /// Background notation knowledge.
    pub fn uses_context(self) -> bool {
        matches!(
            self,
            ExperimentId::E2 | ExperimentId::E3 | ExperimentId::E4 | ExperimentId::E5
        )
    }

    /// System-specific domain knowledge.
    pub fn uses_domain(self) -> bool {
        matches!(
            self,
            ExperimentId::E2 | ExperimentId::E3 | ExperimentId::E6 | ExperimentId::E7
        )
    }

    /// The pattern in predicate form plus its production rules.
    pub fn uses_pattern(self) -> bool {
        self != ExperimentId::E1
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// Whether the argued property is safety or security.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    Safety,
    Security,
}

impl CaseKind {
    pub fn word(self) -> &'static str {
        match self {
            CaseKind::Safety => "safety",
            CaseKind::Security => "security",
        }
    }
}

/// The system a case is requested for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSpec {
    /// Human-readable name used verbatim in the request sentence.
    pub display_name: String,
    pub kind: CaseKind,
    /// Pattern in predicate form.
    pub pattern: String,
}

/// A worked pattern-to-case demonstration from a different system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleCase {
    pub display_name: String,
    pub kind: CaseKind,
    pub pattern: String,
    pub case_prose: String,
}

/// Knowledge sources an arm may draw on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBundle {
    /// Notation background shared across systems.
    pub gsn_context: String,
    /// How to read the predicate form.
    pub rules: String,
    /// Domain knowledge for the target system.
    pub domain: String,
    pub example: Option<ExampleCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("{experiment} needs {missing}, which the knowledge bundle does not provide")]
    ConfigBundleMismatch {
        experiment: ExperimentId,
        missing: String,
    },
}

/// A complete chat prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub user: String,
}

fn block(name: &str, body: &str) -> String {
    format!("@{name}\n{}\n@END_{name}\n\n", body.trim_end())
}

/// Builds the system and user prompts for one arm and target.
pub fn build_prompts(
    experiment: ExperimentId,
    target: &TargetSpec,
    knowledge: &KnowledgeBundle,
) -> Result<PromptBundle, PromptError> {
    let mismatch = |missing: &str| PromptError::ConfigBundleMismatch {
        experiment,
        missing: missing.to_string(),
    };

    let request = format!(
        "Create a {} case for {} and display it in a hierarchical tree format using dashes (-) to denote different levels.",
        target.kind.word(),
        target.display_name
    );

    if !experiment.uses_pattern() {
        return Ok(PromptBundle {
            system: SYSTEM_PREAMBLE.to_string(),
            user: request,
        });
    }

    let mut user = String::new();
    if knowledge.rules.trim().is_empty() {
        return Err(mismatch("production rules"));
    }
    user.push_str(&block(RULES_SENTINEL, &knowledge.rules));

    if experiment.uses_context() {
        if knowledge.gsn_context.trim().is_empty() {
            return Err(mismatch("notation context"));
        }
        user.push_str(&block(CONTEXT_SENTINEL, &knowledge.gsn_context));
    }
    if experiment.uses_domain() {
        if knowledge.domain.trim().is_empty() {
            return Err(mismatch("domain knowledge"));
        }
        user.push_str(&block(DOMAIN_SENTINEL, &knowledge.domain));
    }
    if experiment.uses_example() {
        let Some(example) = &knowledge.example else {
            return Err(mismatch("a worked example"));
        };
        let body = format!(
            "A {} case for {} was instantiated from this pattern:\n\n{}\nThe finished case reads:\n\n{}",
            example.kind.word(),
            example.display_name,
            example.pattern.trim_end().to_string() + "\n",
            example.case_prose.trim_end()
        );
        user.push_str(&block(EXAMPLE_SENTINEL, &body));
    }

    user.push_str(&block(PATTERN_SENTINEL, &target.pattern));
    user.push_str(&format!(
        "Instantiate the pattern between @{PATTERN_SENTINEL} and @END_{PATTERN_SENTINEL}, replacing every {{...}} placeholder and resolving every multiplicity, choice, and optionality. {request}"
    ));

    Ok(PromptBundle {
        system: SYSTEM_PREAMBLE.to_string(),
        user,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target() -> TargetSpec {
        TargetSpec {
            display_name: "ACAS Xu (Airborne Collision Avoidance System Xu)".to_string(),
            kind: CaseKind::Security,
            pattern: "Goal(G1, The {system} is secure)".to_string(),
        }
    }

    fn bundle() -> KnowledgeBundle {
        KnowledgeBundle {
            gsn_context: "Notation background.".to_string(),
            rules: "Reading rules.".to_string(),
            domain: "Domain facts.".to_string(),
            example: Some(ExampleCase {
                display_name: "BlueROV2".to_string(),
                kind: CaseKind::Safety,
                pattern: "Goal(G1, The {vehicle} is safe)".to_string(),
                case_prose: "Goal G1: The BlueROV2 is safe".to_string(),
            }),
        }
    }

    #[test]
    fn baseline_prompts_are_pinned() {
        let p = build_prompts(ExperimentId::E1, &target(), &KnowledgeBundle::default()).unwrap();
        assert_eq!(
            p.system,
            "You are an assistant who assists in developing an assurance case in a tree structure using Goal Structuring Notation (GSN). Your role is to create an assurance case."
        );
        assert_eq!(
            p.user,
            "Create a security case for ACAS Xu (Airborne Collision Avoidance System Xu) and display it in a hierarchical tree format using dashes (-) to denote different levels."
        );
    }

    #[test]
    fn block_presence_matches_flags_for_every_arm() {
        for exp in ExperimentId::ALL {
            let p = build_prompts(exp, &target(), &bundle()).unwrap();
            let has = |name: &str| {
                p.user.contains(&format!("@{name}\n")) && p.user.contains(&format!("@END_{name}"))
            };
            assert_eq!(has(EXAMPLE_SENTINEL), exp.uses_example(), "{exp}");
            assert_eq!(has(CONTEXT_SENTINEL), exp.uses_context(), "{exp}");
            assert_eq!(has(DOMAIN_SENTINEL), exp.uses_domain(), "{exp}");
            assert_eq!(has(PATTERN_SENTINEL), exp.uses_pattern(), "{exp}");
            assert_eq!(has(RULES_SENTINEL), exp.uses_pattern(), "{exp}");
            assert_eq!(p.system, SYSTEM_PREAMBLE, "{exp}");
        }
    }

    #[test]
    fn blocks_appear_in_fixed_order() {
        let p = build_prompts(ExperimentId::E2, &target(), &bundle()).unwrap();
        let pos = |name: &str| p.user.find(&format!("@{name}\n")).unwrap();
        assert!(pos(RULES_SENTINEL) < pos(CONTEXT_SENTINEL));
        assert!(pos(CONTEXT_SENTINEL) < pos(DOMAIN_SENTINEL));
        assert!(pos(DOMAIN_SENTINEL) < pos(EXAMPLE_SENTINEL));
        assert!(pos(EXAMPLE_SENTINEL) < pos(PATTERN_SENTINEL));
    }

    #[test]
    fn pattern_only_arm_has_no_knowledge_blocks() {
        let p = build_prompts(ExperimentId::E9, &target(), &bundle()).unwrap();
        assert!(p.user.starts_with("@RULES\n"));
        assert!(!p.user.contains("@CONTEXT"));
        assert!(!p.user.contains("@DOMAIN"));
        assert!(!p.user.contains("@EXAMPLE"));
        assert!(p
            .user
            .contains("@PATTERN\nGoal(G1, The {system} is secure)\n@END_PATTERN"));
        assert!(p.user.contains("Create a security case for ACAS Xu"));
    }

    #[test]
    fn missing_knowledge_is_a_mismatch() {
        let mut b = bundle();
        b.example = None;
        let err = build_prompts(ExperimentId::E2, &target(), &b).unwrap_err();
        assert!(matches!(err, PromptError::ConfigBundleMismatch { .. }));

        let mut b = bundle();
        b.domain = String::new();
        assert!(build_prompts(ExperimentId::E7, &target(), &b).is_err());
        // An arm that skips domain knowledge tolerates its absence.
        assert!(build_prompts(ExperimentId::E5, &target(), &b).is_ok());
    }

    #[test]
    fn prompts_are_deterministic() {
        let a = build_prompts(ExperimentId::E2, &target(), &bundle()).unwrap();
        let b = build_prompts(ExperimentId::E2, &target(), &bundle()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn experiment_codes_parse_back() {
        for exp in ExperimentId::ALL {
            assert_eq!(ExperimentId::parse(exp.code()), Some(exp));
            assert_eq!(ExperimentId::parse(&exp.code().to_lowercase()), Some(exp));
        }
        assert_eq!(ExperimentId::parse("E10"), None);
    }
}
