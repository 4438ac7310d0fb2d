//! Surface forms shared by the generators.

pub const SYMBOLS: [&str; 3] = ["A", "B", "C"];
pub const QUERY: &str = "x";
pub const SEPARATOR: &str = "y";

pub const PEOPLE: [&str; 13] = [
    "JOHN", "PAUL", "TOM", "JAMES", "MARY", "ANNA", "LUCY", "PETER", "KATE", "MARK", "SARAH",
    "DAVID", "EMMA",
];
pub const OBJECTS: [&str; 8] =
    ["BANANA", "APPLE", "CHERRY", "GRAPE", "LEMON", "MELON", "PEAR", "PLUM"];
pub const VERBS: [&str; 7] = ["SEE", "HEAR", "SMELL", "TOUCH", "LIKE", "WANT", "FEEL"];
pub const COLORS: [&str; 4] = ["RED", "GREEN", "BLUE", "YELLOW"];
pub const SIZES: [&str; 5] = ["SMALL", "LARGE", "TINY", "HUGE", "BIG"];
pub const NUMBERS: [&str; 14] = [
    "ZERO", "ONE", "TWO", "THREE", "FOUR", "FIVE", "SIX", "SEVEN", "EIGHT", "NINE", "TEN",
    "ELEVEN", "TWELVE", "THIRTEEN",
];

pub const I: &str = "I";
pub const DO: &str = "DO";
pub const NOT: &str = "NOT";
pub const AND: &str = "AND";
pub const BUT: &str = "BUT";
pub const STOP: &str = ".";
pub const ASK: &str = "?";
pub const YES: &str = "YES";
pub const NO: &str = "NO";
pub const ARTICLE: &str = "A";
pub const WHAT: &str = "WHAT";
pub const IS: &str = "IS";
pub const THE: &str = "THE";
pub const OF: &str = "OF";
pub const COLOR: &str = "COLOR";
pub const SIZE: &str = "SIZE";
pub const HOW: &str = "HOW";
pub const MANY: &str = "MANY";
pub const THINGS: &str = "THINGS";
