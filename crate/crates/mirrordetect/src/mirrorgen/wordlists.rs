//! Shared word stock for the offline text generators.
//!
//! The simulacrum and the synthetic-corpus generator draw from the same
//! filler vocabulary so their outputs differ in controlled ways (tells,
//! synonym substitutions, sentence regularity) rather than in trivially
//! separable token sets.

/// Common filler words: function words plus everyday nouns and verbs.
pub(crate) const FILLER_WORDS: &[&str] = &[
    "the", "a", "of", "to", "and", "in", "that", "it", "with", "for", "on", "was", "is", "this",
    "but", "not", "they", "had", "as", "you", "we", "at", "from", "her", "his", "by", "about",
    "over", "after", "before", "during", "people", "time", "year", "way", "day", "thing", "place",
    "work", "week", "house", "point", "world", "hand", "part", "child", "life", "friend", "group",
    "problem", "fact", "use", "help", "show", "start", "end", "need", "get", "give", "think",
    "find", "ask", "tell", "feel", "seem", "keep", "turn", "begin", "talk", "walk", "plan",
    "small", "big", "good", "bad", "fast", "slow", "early", "late", "young", "still", "really",
    "quite", "rather", "often", "again", "always", "never", "while", "where", "because", "though",
];

/// The narrow function-word subset the simulacrum over-uses.
pub(crate) const PREFERRED_FILLER: &[&str] = &[
    "the", "of", "to", "and", "that", "it", "is", "was", "for", "with", "this", "not", "they",
    "but", "from",
];

/// Common word -> rarer synonym, applied by the simulacrum at a fixed rate.
pub(crate) const SYNONYM_TABLE: &[(&str, &str)] = &[
    ("use", "utilize"),
    ("help", "facilitate"),
    ("show", "demonstrate"),
    ("start", "commence"),
    ("end", "conclude"),
    ("need", "necessitate"),
    ("get", "obtain"),
    ("give", "furnish"),
    ("think", "contemplate"),
    ("find", "ascertain"),
    ("ask", "inquire"),
    ("tell", "convey"),
    ("keep", "retain"),
    ("begin", "initiate"),
    ("talk", "converse"),
    ("plan", "formulate"),
    ("small", "minimal"),
    ("big", "substantial"),
    ("good", "favorable"),
    ("bad", "detrimental"),
    ("fast", "expeditious"),
    ("slow", "gradual"),
    ("way", "methodology"),
    ("thing", "element"),
    ("place", "locale"),
    ("work", "endeavor"),
    ("problem", "impediment"),
    ("fact", "consideration"),
    ("feel", "perceive"),
    ("turn", "pivot"),
];

/// Fallback topic words for prompts that carry no usable content words.
pub(crate) const FALLBACK_TOPICS: &[&str] = &[
    "garden", "market", "journey", "festival", "library", "harbor", "mountain", "recipe",
    "concert", "museum",
];

/// Instruction vocabulary excluded when harvesting content words from a
/// prompt, so mirrors echo the source document rather than the template.
/// Must cover every non-slot word of the bundled templates (enforced by a
/// test in `mirrorgen`).
pub(crate) const INSTRUCTION_WORDS: &[&str] = &[
    "write", "review", "star", "around", "words", "word", "long", "make", "article", "answer",
    "question", "essay", "email", "title", "start", "these", "sentences", "about", "with",
    "following", "only", "give", "your", "response", "include", "count", "information",
    "besides", "that", "actual", "itself", "headline", "byline", "subject", "signature",
    "block", "body", "restate", "restatement", "good", "this", "news", "focusing", "line",
    "text", "wikipedia", "what", "opening",
];
