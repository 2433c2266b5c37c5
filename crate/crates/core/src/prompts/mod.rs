//! Prompt templates with named slots, and the tag protocol used to read
//! model replies.
//!
//! Every template is an asset file under `assets/prompts/` with a small
//! front-matter block naming its slots. The files are compiled in, and each
//! body is pinned by a SHA-256 in [`EMBEDDED`]; [`PromptRegistry::load_dir`]
//! loads an external copy and refuses bodies whose hash differs unless the
//! caller opts in.
//!
//! Slots are written `{{name}}` and substituted in a single pass, so bound
//! text is never re-scanned for markers.
//!
//! | symbol            | slot              | bound to                                   |
//! |-------------------|-------------------|--------------------------------------------|
//! | D                 | `draft`           | rendered five-question draft               |
//! | W                 | `pgtree_overview` | rendered guideline tree                    |
//! | n_ij              | `guideline`       | one subsection guideline                   |
//! | r_ij              | `retrieved`       | content copied out of the reference        |
//! | R                 | `reference`       | rendered reference bundle                  |
//! | d_ij              | `subsection`      | subsection text under review or revision   |
//! | Feedback          | `feedback`        | examiner advice                            |
//! | a_i               | `answer`          | one draft answer                           |
//! | d (description)   | `description`     | a full detailed description                |
//! | P (source record) | `patent`          | full source patent text                    |

pub mod tags;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::content_hash;

pub use tags::{
    extract_all, extract_numbered, extract_one, extract_sections, extract_tag, numbered_reminder, wrap,
    Multiplicity, TagError, TagSpec, TagValue,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("slot \"{0}\" is not bound")]
    MissingSlot(String),
    #[error("unknown template id \"{0}\"")]
    UnknownTemplate(String),
    #[error("template {id}: {reason}")]
    Malformed { id: String, reason: String },
    #[error("template {id} body hash {found} does not match pinned {expected}")]
    HashMismatch {
        id: String,
        expected: String,
        found: String,
    },
    #[error("cannot read prompt asset {path}: {reason}")]
    Io { path: String, reason: String },
}

macro_rules! templates {
    ($( $variant:ident => $name:literal, $hash:literal; )*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum TemplateId { $( $variant, )* }

        impl TemplateId {
            pub const ALL: &'static [TemplateId] = &[ $( TemplateId::$variant, )* ];

            pub fn name(self) -> &'static str {
                match self { $( TemplateId::$variant => $name, )* }
            }

            fn asset(self) -> &'static str {
                match self {
                    $( TemplateId::$variant => include_str!(concat!("../../assets/prompts/", $name, ".txt")), )*
                }
            }
        }

        /// Pinned SHA-256 of every template body.
        pub const EMBEDDED: &[(&str, &str)] = &[ $( ($name, $hash), )* ];
    };
}

templates! {
    TitleWriter => "title_writer", "503a9c8c8db69d56a0999fc6b219370ad31df48eab4308e81027d4ea54c313ad";
    AbstractWriter => "abstract_writer", "70a1af92b9ba356a03935c7cdc8b801f215a29803de4e550013d0e4181c28864";
    BackgroundWriter => "background_writer", "91b6d519fd7bd1b5d5afc5bd1f89fd23bba06ed75fe505c73f9c7bfa372ecc32";
    SummaryWriter => "summary_writer", "fb2657a03f0c6d662ad02b7f2972199d302ccf54051a95d4427845a739aebe0c";
    ClaimsWriter => "claims_writer", "7f5f48366cd84ea02d8bebf9a7049387fde247c1eaba77991c1375cea36fc65b";
    Planner => "planner", "d5b21245f39c80ab8527c6acd8a26898bde60c883a056af06aad2c1bb55fbc88";
    PlannerExpand => "planner_expand", "54a72128b6edd4d03f0b9a87ed0884599dbd874cd03ec3d00ea14163a0d79af0";
    PgtreeCollect => "pgtree_collect", "3ec8c2c0a351f498443f045fac83ccc71d149fc6e421f6343d95f33cc084b25e";
    Retrieval => "retrieval", "1f4108bcf92e513b335033db310b0c5b48dffa35b471df6b2b42ac6c4bd2de8c";
    DescriptionWrite => "description_write", "337b06baf2c8b293850cd9fe246d4647266a0681b3f7575680ec935d37c59ddc";
    DescriptionRefine => "description_refine", "dfcc90afdf08022d4440372eef3b75fad3a933c265e069854af905407d4c656c";
    ExaminerReview => "examiner_review", "08152447453c2fbede8f718469cec9d1a4177f41663d0b591729bf3a9c82370d";
    DraftQualityQ1 => "draft_quality_q1", "bd6c6c319ecd2151be1e48e0e2776bba12a4baa37a65164064c341313b626edf";
    DraftQualityQ2 => "draft_quality_q2", "76c12c8806cb4c95ddca7327467e8d85509804b579bb3ec2292e3f2a1dd75f5d";
    DraftQualityQ3 => "draft_quality_q3", "d7ebf351c30394362e0075e1c986d99929883e13d5d8908e45ae4bcda6093f32";
    DraftQualityQ4 => "draft_quality_q4", "fe7fba4de0f2746216a376f81c19f4fc9cf1b3f04eb02362d9d368c6bf179d58";
    DraftQualityQ5 => "draft_quality_q5", "12fe13bb7cb6690876bbeb8b8c268a17f5cead4a4e8935df1ef0b6295d0e6be0";
    InventorQ1 => "inventor_q1", "633e6a03b011f4e7051f2819c83ca95c8cab33f435df109e5dd610cc34adfc25";
    InventorQ2 => "inventor_q2", "5ea3cb19f45299eb644578bc79a604db548cd906548ed635b16f9616257b72e2";
    InventorQ3 => "inventor_q3", "42ad9852178fbb7f286795428b12bf20d19dfd207ababb98410a7ec8af3d9e32";
    InventorQ4 => "inventor_q4", "84835b8237a59f3b981651f3c6b6156363dde8c2a140b47f9c884b44ec48fed7";
    InventorQ5 => "inventor_q5", "9638463f718fa9e710f92e28bd0222ed30a8e567a39958389734bc3df012e2fc";
    ZeroShotFull => "zero_shot_full", "d98903b04ce3c5bacb1d847cf4619d1ba377fd9e408230e26f15732c5b73e78f";
}

impl TemplateId {
    pub fn draft_quality(question_id: u8) -> Option<Self> {
        Some(match question_id {
            1 => Self::DraftQualityQ1,
            2 => Self::DraftQualityQ2,
            3 => Self::DraftQualityQ3,
            4 => Self::DraftQualityQ4,
            5 => Self::DraftQualityQ5,
            _ => return None,
        })
    }

    pub fn inventor(question_id: u8) -> Option<Self> {
        Some(match question_id {
            1 => Self::InventorQ1,
            2 => Self::InventorQ2,
            3 => Self::InventorQ3,
            4 => Self::InventorQ4,
            5 => Self::InventorQ5,
            _ => return None,
        })
    }

    pub fn pinned_hash(self) -> &'static str {
        EMBEDDED
            .iter()
            .find(|(n, _)| *n == self.name())
            .map(|(_, h)| *h)
            .expect("every template is pinned")
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TemplateId {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| PromptError::UnknownTemplate(s.to_string()))
    }
}

fn slot_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{([a-z_][a-z0-9_]*)\}\}").expect("slot regex"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: String,
    pub required_slots: BTreeSet<String>,
}

impl PromptTemplate {
    /// Parses an asset file: `---`, `id:` and `slots:` lines, `---`, body.
    pub fn parse(source: &str) -> Result<Self, PromptError> {
        let malformed = |reason: &str| PromptError::Malformed {
            id: "?".into(),
            reason: reason.to_string(),
        };
        let rest = source
            .strip_prefix("---\n")
            .ok_or_else(|| malformed("missing front matter"))?;
        let (front, body) = rest
            .split_once("\n---\n")
            .ok_or_else(|| malformed("unterminated front matter"))?;
        let mut id = None;
        let mut slots = BTreeSet::new();
        for line in front.lines() {
            match line.split_once(':') {
                Some(("id", v)) => id = Some(v.trim().parse::<TemplateId>()?),
                Some(("slots", v)) => {
                    slots = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect()
                }
                _ => return Err(malformed(&format!("unexpected front matter line {line:?}"))),
            }
        }
        let id = id.ok_or_else(|| malformed("front matter lacks id"))?;
        let body = body.strip_suffix('\n').unwrap_or(body).to_string();
        let in_body: BTreeSet<String> = slot_regex()
            .captures_iter(&body)
            .map(|c| c[1].to_string())
            .collect();
        if in_body != slots {
            return Err(PromptError::Malformed {
                id: id.name().into(),
                reason: format!("declared slots {slots:?} differ from body slots {in_body:?}"),
            });
        }
        Ok(Self {
            id,
            body,
            required_slots: slots,
        })
    }

    pub fn body_hash(&self) -> String {
        content_hash(&self.body)
    }

    pub fn render(&self, bindings: &Bindings) -> Result<String, PromptError> {
        if let Some(missing) = self
            .required_slots
            .iter()
            .find(|s| !bindings.0.contains_key(s.as_str()))
        {
            return Err(PromptError::MissingSlot(missing.clone()));
        }
        let mut out = String::with_capacity(self.body.len());
        let mut last = 0;
        for c in slot_regex().captures_iter(&self.body) {
            let m = c.get(0).expect("match");
            out.push_str(&self.body[last..m.start()]);
            out.push_str(&bindings.0[&c[1]]);
            last = m.end();
        }
        out.push_str(&self.body[last..]);
        Ok(out)
    }
}

/// Slot name → bound text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings(BTreeMap<String, String>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, slot: &str, value: impl Into<String>) -> Self {
        self.0.insert(slot.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct PromptRegistry {
    templates: BTreeMap<TemplateId, PromptTemplate>,
}

impl PromptRegistry {
    /// The compiled-in templates.
    pub fn embedded() -> &'static PromptRegistry {
        static REG: OnceLock<PromptRegistry> = OnceLock::new();
        REG.get_or_init(|| {
            let templates = TemplateId::ALL
                .iter()
                .map(|id| {
                    let t = PromptTemplate::parse(id.asset()).expect("embedded template parses");
                    assert_eq!(t.id, *id, "asset id mismatch");
                    (*id, t)
                })
                .collect();
            PromptRegistry { templates }
        })
    }

    /// Loads `<name>.txt` for every template from `dir`. Bodies whose hash
    /// differs from the pinned one are rejected unless `allow_modified`.
    pub fn load_dir(dir: &Path, allow_modified: bool) -> Result<Self, PromptError> {
        let mut templates = BTreeMap::new();
        for id in TemplateId::ALL {
            let path = dir.join(format!("{}.txt", id.name()));
            let source = std::fs::read_to_string(&path).map_err(|e| PromptError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            let t = PromptTemplate::parse(&source)?;
            if t.id != *id {
                return Err(PromptError::Malformed {
                    id: id.name().into(),
                    reason: format!("file declares id {}", t.id),
                });
            }
            let found = t.body_hash();
            if !allow_modified && found != id.pinned_hash() {
                return Err(PromptError::HashMismatch {
                    id: id.name().into(),
                    expected: id.pinned_hash().into(),
                    found,
                });
            }
            templates.insert(*id, t);
        }
        Ok(Self { templates })
    }

    pub fn get(&self, id: TemplateId) -> &PromptTemplate {
        &self.templates[&id]
    }

    pub fn render(&self, id: TemplateId, bindings: &Bindings) -> Result<String, PromptError> {
        self.get(id).render(bindings)
    }
}

/// Renders an embedded template.
pub fn render(id: TemplateId, bindings: &Bindings) -> Result<String, PromptError> {
    PromptRegistry::embedded().render(id, bindings)
}
