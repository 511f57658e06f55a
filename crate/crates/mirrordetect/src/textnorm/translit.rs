//! Bundled transliteration table: non-ASCII code points to nearest ASCII.
//!
//! The table is fixed and shipped with the crate so normalization never
//! depends on an external service or locale. Coverage: Latin-1 Supplement
//! and Latin Extended-A letters (accents fold to base letters), curly
//! quotes and guillemets to straight quotes, the dash family to `-`,
//! unicode spaces to plain space, a handful of punctuation marks with an
//! obvious ASCII spelling. Anything else non-ASCII is dropped.

/// Result of looking a single char up in the table.
pub enum Mapping {
    /// Already ASCII; keep as-is.
    Keep,
    /// Replace with this ASCII string (may be empty, e.g. soft hyphen).
    Ascii(&'static str),
    /// Not in the table; the caller drops the character.
    Unmapped,
}

/// True for code points in the emoji / pictographic blocks, which are
/// removed before transliteration runs.
pub fn is_emoji(c: char) -> bool {
    matches!(u32::from(c),
        0x1F000..=0x1F0FF   // mahjong, dominoes, playing cards
        | 0x1F1E6..=0x1F1FF // regional indicators (flags)
        | 0x1F300..=0x1F5FF // misc symbols and pictographs
        | 0x1F600..=0x1F64F // emoticons
        | 0x1F680..=0x1F6FF // transport and map symbols
        | 0x1F700..=0x1F8FF // alchemical, arrows supplements
        | 0x1F900..=0x1F9FF // supplemental symbols and pictographs
        | 0x1FA00..=0x1FAFF // symbols and pictographs extended-A
        | 0x2600..=0x26FF   // miscellaneous symbols
        | 0x2700..=0x27BF   // dingbats
        | 0x231A..=0x231B   // watch, hourglass
        | 0x23E9..=0x23F3   // av control / clock emoji
        | 0xFE00..=0xFE0F   // variation selectors
        | 0x200D           // zero-width joiner (emoji sequences)
    )
}

/// Look up the ASCII replacement for a character.
pub fn transliterate_char(c: char) -> Mapping {
    use Mapping::{Ascii, Unmapped};
    if c.is_ascii() {
        return Mapping::Keep;
    }
    match c {
        // -- spaces and invisible characters --------------------------------
        '\u{00A0}' | '\u{2000}'..='\u{200A}' | '\u{202F}' | '\u{205F}' | '\u{3000}' => Ascii(" "),
        '\u{00AD}' | '\u{200B}' | '\u{200C}' | '\u{200E}' | '\u{200F}' | '\u{2060}'
        | '\u{FEFF}' => Ascii(""),
        '\u{2028}' => Ascii("\n"),
        '\u{2029}' => Ascii("\n\n"),

        // -- quotes ---------------------------------------------------------
        '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2032}' | '\u{2039}'
        | '\u{203A}' | '\u{0060}' => Ascii("'"),
        '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{2033}' | '\u{00AB}'
        | '\u{00BB}' => Ascii("\""),

        // -- dashes and related punctuation ---------------------------------
        '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}'
        | '\u{2212}' => Ascii("-"),
        '\u{2022}' | '\u{00B7}' => Ascii("*"),
        '\u{2024}' => Ascii("."),
        '\u{2026}' => Ascii("..."),
        '\u{2044}' => Ascii("/"),
        '\u{00A1}' => Ascii("!"),
        '\u{00BF}' => Ascii("?"),
        '\u{00D7}' => Ascii("x"),
        '\u{00F7}' => Ascii("/"),
        '\u{00B9}' => Ascii("1"),
        '\u{00B2}' => Ascii("2"),
        '\u{00B3}' => Ascii("3"),
        '\u{00BC}' => Ascii("1/4"),
        '\u{00BD}' => Ascii("1/2"),
        '\u{00BE}' => Ascii("3/4"),

        // -- Latin-1 Supplement letters --------------------------------------
        'À' | 'Á' | 'Â' | 'Ã' | 'Ä' | 'Å' => Ascii("A"),
        'Æ' => Ascii("AE"),
        'Ç' => Ascii("C"),
        'È' | 'É' | 'Ê' | 'Ë' => Ascii("E"),
        'Ì' | 'Í' | 'Î' | 'Ï' => Ascii("I"),
        'Ð' => Ascii("D"),
        'Ñ' => Ascii("N"),
        'Ò' | 'Ó' | 'Ô' | 'Õ' | 'Ö' | 'Ø' => Ascii("O"),
        'Ù' | 'Ú' | 'Û' | 'Ü' => Ascii("U"),
        'Ý' => Ascii("Y"),
        'Þ' => Ascii("Th"),
        'ß' => Ascii("ss"),
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' => Ascii("a"),
        'æ' => Ascii("ae"),
        'ç' => Ascii("c"),
        'è' | 'é' | 'ê' | 'ë' => Ascii("e"),
        'ì' | 'í' | 'î' | 'ï' => Ascii("i"),
        'ð' => Ascii("d"),
        'ñ' => Ascii("n"),
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' => Ascii("o"),
        'ù' | 'ú' | 'û' | 'ü' => Ascii("u"),
        'ý' | 'ÿ' => Ascii("y"),
        'þ' => Ascii("th"),

        // -- Latin Extended-A -------------------------------------------------
        'Ā' | 'Ă' | 'Ą' => Ascii("A"),
        'ā' | 'ă' | 'ą' => Ascii("a"),
        'Ć' | 'Ĉ' | 'Ċ' | 'Č' => Ascii("C"),
        'ć' | 'ĉ' | 'ċ' | 'č' => Ascii("c"),
        'Ď' | 'Đ' => Ascii("D"),
        'ď' | 'đ' => Ascii("d"),
        'Ē' | 'Ĕ' | 'Ė' | 'Ę' | 'Ě' => Ascii("E"),
        'ē' | 'ĕ' | 'ė' | 'ę' | 'ě' => Ascii("e"),
        'Ĝ' | 'Ğ' | 'Ġ' | 'Ģ' => Ascii("G"),
        'ĝ' | 'ğ' | 'ġ' | 'ģ' => Ascii("g"),
        'Ĥ' | 'Ħ' => Ascii("H"),
        'ĥ' | 'ħ' => Ascii("h"),
        'Ĩ' | 'Ī' | 'Ĭ' | 'Į' | 'İ' => Ascii("I"),
        'ĩ' | 'ī' | 'ĭ' | 'į' | 'ı' => Ascii("i"),
        'Ĳ' => Ascii("IJ"),
        'ĳ' => Ascii("ij"),
        'Ĵ' => Ascii("J"),
        'ĵ' => Ascii("j"),
        'Ķ' => Ascii("K"),
        'ķ' | 'ĸ' => Ascii("k"),
        'Ĺ' | 'Ļ' | 'Ľ' | 'Ŀ' | 'Ł' => Ascii("L"),
        'ĺ' | 'ļ' | 'ľ' | 'ŀ' | 'ł' => Ascii("l"),
        'Ń' | 'Ņ' | 'Ň' | 'Ŋ' => Ascii("N"),
        'ń' | 'ņ' | 'ň' | 'ŋ' => Ascii("n"),
        'ŉ' => Ascii("'n"),
        'Ō' | 'Ŏ' | 'Ő' => Ascii("O"),
        'ō' | 'ŏ' | 'ő' => Ascii("o"),
        'Œ' => Ascii("OE"),
        'œ' => Ascii("oe"),
        'Ŕ' | 'Ŗ' | 'Ř' => Ascii("R"),
        'ŕ' | 'ŗ' | 'ř' => Ascii("r"),
        'Ś' | 'Ŝ' | 'Ş' | 'Š' => Ascii("S"),
        'ś' | 'ŝ' | 'ş' | 'š' => Ascii("s"),
        'Ţ' | 'Ť' | 'Ŧ' => Ascii("T"),
        'ţ' | 'ť' | 'ŧ' => Ascii("t"),
        'Ũ' | 'Ū' | 'Ŭ' | 'Ů' | 'Ű' | 'Ų' => Ascii("U"),
        'ũ' | 'ū' | 'ŭ' | 'ů' | 'ű' | 'ų' => Ascii("u"),
        'Ŵ' => Ascii("W"),
        'ŵ' => Ascii("w"),
        'Ŷ' | 'Ÿ' => Ascii("Y"),
        'ŷ' => Ascii("y"),
        'Ź' | 'Ż' | 'Ž' => Ascii("Z"),
        'ź' | 'ż' | 'ž' => Ascii("z"),
        'ſ' => Ascii("s"),

        _ => Unmapped,
    }
}
