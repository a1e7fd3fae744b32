//! The canonical "what did you see" grammar.

/// Five-item lexicon deriving "what did you see".
pub const WH_LEXICON: &str = "\
# covert complementizer that attracts a wh-phrase
:: =i +wh c
did :: =v i
see :: d= =d v
what :: d -wh
you :: d
";

/// Polish-order item sequence of the derivation of "what did you see".
pub const WH_SEQUENCE: &str = "ε did see you what";

pub const WH_SENTENCE: &str = "what did you see";
