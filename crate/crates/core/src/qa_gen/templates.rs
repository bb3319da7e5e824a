use std::path::Path;

use serde::{Deserialize, Serialize};

use super::QaGenError;
use crate::llm_gateway::Role;

pub const TEMPLATE_VERSION: &str = "v1";

/// Prompt templates for every gateway role. Placeholders are `{{name}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub version: String,
    pub question_gen: String,
    pub answer_gen: String,
    pub decomposer: String,
    pub qa_assistant: String,
    pub persona_expand: String,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    pub fn builtin() -> Self {
        Self {
            version: TEMPLATE_VERSION.into(),
            question_gen: include_str!("templates/question_gen.v1.txt").into(),
            answer_gen: include_str!("templates/answer_gen.v1.txt").into(),
            decomposer: include_str!("templates/decomposer.v1.txt").into(),
            qa_assistant: include_str!("templates/qa_assistant.v1.txt").into(),
            persona_expand: include_str!("templates/persona_expand.v1.txt").into(),
        }
    }

    pub fn get(&self, role: Role) -> &str {
        match role {
            Role::QuestionGen => &self.question_gen,
            Role::AnswerGen => &self.answer_gen,
            Role::Decomposer => &self.decomposer,
            Role::QaAssistant => &self.qa_assistant,
            Role::PersonaExpand => &self.persona_expand,
        }
    }

    /// Load `{role}.{version}.txt` for every role from `dir`.
    pub fn from_dir(dir: &Path, version: &str) -> Result<Self, QaGenError> {
        let load = |role: Role| {
            let path = dir.join(format!("{}.{version}.txt", role.as_str()));
            std::fs::read_to_string(&path).map_err(|e| QaGenError::Template(format!("{}: {e}", path.display())))
        };
        Ok(Self {
            version: version.to_string(),
            question_gen: load(Role::QuestionGen)?,
            answer_gen: load(Role::AnswerGen)?,
            decomposer: load(Role::Decomposer)?,
            qa_assistant: load(Role::QaAssistant)?,
            persona_expand: load(Role::PersonaExpand)?,
        })
    }
}

/// Substitute `{{key}}` placeholders in one pass, so substituted values are
/// never re-scanned. Unknown placeholders are an error.
pub fn render(template: &str, vars: &[(&str, &str)]) -> Result<String, QaGenError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after.find("}}").ok_or_else(|| QaGenError::Template("unclosed placeholder".into()))?;
        let key = &after[..end];
        let value = vars
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| QaGenError::Template(format!("no value for placeholder {{{{{key}}}}}")))?;
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    Ok(out)
}
