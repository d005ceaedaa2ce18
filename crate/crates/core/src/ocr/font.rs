//! Fixed 5x7 bitmap font for the synthetic engine.
//!
//! Rows are 5-bit values, bit 4 = leftmost column. Unaccented letters and
//! digits keep row 0 empty; the diacritic marks used by the corpus generator
//! live there. Two layout rules keep glyphs recoverable after a 3x3 smoothing
//! pass at the render scale: no glyph contains an isolated ink bit, and all
//! marks are drawn as runs of at least two.

pub const GLYPH_W: usize = 5;
pub const GLYPH_H: usize = 7;
pub const GLYPH_BITS: usize = GLYPH_W * GLYPH_H;

/// Packs rows into a 35-bit mask, bit `gy * 5 + gx`.
pub const fn mask(rows: [u8; GLYPH_H]) -> u64 {
    let mut bits = 0u64;
    let mut gy = 0;
    while gy < GLYPH_H {
        let mut gx = 0;
        while gx < GLYPH_W {
            if rows[gy] >> (GLYPH_W - 1 - gx) & 1 == 1 {
                bits |= 1 << (gy * GLYPH_W + gx);
            }
            gx += 1;
        }
        gy += 1;
    }
    bits
}

// diacritic marks occupying row 0 of a letter body
const ACUTE: u8 = 0b00110;
const GRAVE: u8 = 0b01100;
const CIRCUMFLEX: u8 = 0b01110;
const TILDE: u8 = 0b11011;
const CEDILLA_MARK: u8 = 0b00011;

const A_BODY: [u8; 6] = [0b01110, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001];
const C_BODY: [u8; 6] = [0b01111, 0b10000, 0b10000, 0b10000, 0b10000, 0b01111];
const E_BODY: [u8; 6] = [0b11111, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111];
const I_BODY: [u8; 6] = [0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b11111];
const O_BODY: [u8; 6] = [0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110];
const U_BODY: [u8; 6] = [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110];

const fn with_mark(mark: u8, body: [u8; 6]) -> [u8; GLYPH_H] {
    [mark, body[0], body[1], body[2], body[3], body[4], body[5]]
}

const fn plain(body: [u8; 6]) -> [u8; GLYPH_H] {
    with_mark(0, body)
}

/// The full character set: uppercase letters, the accented letters the
/// corpus generator emits, digits, basic punctuation and space.
pub const GLYPHS: &[(char, [u8; GLYPH_H])] = &[
    (' ', [0; 7]),
    ('A', plain(A_BODY)),
    ('B', plain([0b11110, 0b10011, 0b11110, 0b10011, 0b10011, 0b11110])),
    ('C', plain(C_BODY)),
    ('D', plain([0b11110, 0b10001, 0b10001, 0b10001, 0b10001, 0b11110])),
    ('E', plain(E_BODY)),
    ('F', plain([0b11111, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000])),
    ('G', plain([0b01111, 0b10000, 0b10011, 0b10001, 0b10001, 0b01111])),
    ('H', plain([0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001])),
    ('I', plain(I_BODY)),
    ('J', plain([0b01111, 0b00010, 0b00010, 0b00010, 0b10010, 0b11110])),
    ('K', plain([0b10011, 0b10110, 0b11100, 0b11100, 0b10110, 0b10011])),
    ('L', plain([0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111])),
    ('M', plain([0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001])),
    ('N', plain([0b10001, 0b11001, 0b11101, 0b10111, 0b10011, 0b10001])),
    ('O', plain(O_BODY)),
    ('P', plain([0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000])),
    ('Q', plain([0b01110, 0b10001, 0b10001, 0b10011, 0b10011, 0b01111])),
    ('R', plain([0b11110, 0b10001, 0b10001, 0b11110, 0b10110, 0b10011])),
    ('S', plain([0b01111, 0b11000, 0b01110, 0b00011, 0b00011, 0b11110])),
    ('T', plain([0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100])),
    ('U', plain(U_BODY)),
    ('V', plain([0b10001, 0b10001, 0b10001, 0b11011, 0b01110, 0b00100])),
    ('W', plain([0b10001, 0b10001, 0b10101, 0b10101, 0b11011, 0b10001])),
    ('X', plain([0b10001, 0b11011, 0b01110, 0b01110, 0b11011, 0b10001])),
    ('Y', plain([0b10001, 0b11011, 0b01110, 0b00100, 0b00100, 0b00100])),
    ('Z', plain([0b11111, 0b00011, 0b00110, 0b01100, 0b11000, 0b11111])),
    ('Á', with_mark(ACUTE, A_BODY)),
    ('À', with_mark(GRAVE, A_BODY)),
    ('Â', with_mark(CIRCUMFLEX, A_BODY)),
    ('Ã', with_mark(TILDE, A_BODY)),
    ('É', with_mark(ACUTE, E_BODY)),
    ('Ê', with_mark(CIRCUMFLEX, E_BODY)),
    ('Í', with_mark(ACUTE, I_BODY)),
    ('Ó', with_mark(ACUTE, O_BODY)),
    ('Ô', with_mark(CIRCUMFLEX, O_BODY)),
    ('Õ', with_mark(TILDE, O_BODY)),
    ('Ú', with_mark(ACUTE, U_BODY)),
    ('Ç', with_mark(CEDILLA_MARK, C_BODY)),
    ('0', plain([0b01110, 0b10011, 0b10101, 0b10101, 0b11001, 0b01110])),
    ('1', plain([0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b01110])),
    ('2', plain([0b11110, 0b00001, 0b00011, 0b01110, 0b11000, 0b11111])),
    ('3', plain([0b11110, 0b00011, 0b01110, 0b00011, 0b00011, 0b11110])),
    ('4', plain([0b00110, 0b01110, 0b11010, 0b11111, 0b00010, 0b00010])),
    ('5', plain([0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b11110])),
    ('6', plain([0b01111, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110])),
    ('7', plain([0b11111, 0b00001, 0b00011, 0b00110, 0b01100, 0b01100])),
    ('8', plain([0b01110, 0b11011, 0b01110, 0b10001, 0b10001, 0b01110])),
    ('9', plain([0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b11110])),
    ('.', [0, 0, 0, 0, 0, 0b01100, 0b01100]),
    (',', [0, 0, 0, 0, 0, 0b00110, 0b00100]),
    ('-', [0, 0, 0, 0b01110, 0, 0, 0]),
    (':', [0, 0b01100, 0b01100, 0, 0b01100, 0b01100, 0]),
    (';', [0, 0b01100, 0b01100, 0, 0b01100, 0b01100, 0b00100]),
    ('\'', [0b00100, 0b00100, 0, 0, 0, 0, 0]),
    ('º', [0b01110, 0b01010, 0b01110, 0, 0, 0, 0]),
    ('(', [0b00110, 0b01100, 0b01100, 0b01100, 0b01100, 0b00110, 0]),
    (')', [0b01100, 0b00110, 0b00110, 0b00110, 0b00110, 0b01100, 0]),
    ('!', [0b00100, 0b00100, 0b00100, 0b00100, 0, 0b01100, 0b01100]),
    ('?', [0b11110, 0b00011, 0b00110, 0b01100, 0, 0b01100, 0b01100]),
    ('/', [0b00011, 0b00011, 0b00110, 0b01100, 0b11000, 0b11000, 0]),
];

pub fn glyph_index(c: char) -> Option<usize> {
    GLYPHS.iter().position(|&(g, _)| g == c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_glyphs_distinct_as_bitmaps() {
        for (i, (ca, ra)) in GLYPHS.iter().enumerate() {
            for (cb, rb) in &GLYPHS[i + 1..] {
                assert_ne!(mask(*ra), mask(*rb), "{ca:?} and {cb:?} share a bitmap");
            }
        }
    }

    #[test]
    fn apostrophe_rows_are_vertical_pair() {
        let (_, rows) = GLYPHS.iter().find(|(c, _)| *c == '\'').unwrap();
        assert_eq!(rows[0], rows[1]);
        assert_ne!(rows[0], 0);
    }

    #[test]
    fn no_isolated_ink_bits() {
        // every ink bit needs a 4-neighbor so glyphs survive 3x3 smoothing
        for (c, rows) in GLYPHS {
            for gy in 0..GLYPH_H {
                for gx in 0..GLYPH_W {
                    if rows[gy] >> (GLYPH_W - 1 - gx) & 1 == 0 {
                        continue;
                    }
                    let lit = |x: isize, y: isize| -> bool {
                        if !(0..GLYPH_W as isize).contains(&x) || !(0..GLYPH_H as isize).contains(&y) {
                            return false;
                        }
                        rows[y as usize] >> (GLYPH_W - 1 - x as usize) & 1 == 1
                    };
                    let (x, y) = (gx as isize, gy as isize);
                    assert!(
                        lit(x - 1, y) || lit(x + 1, y) || lit(x, y - 1) || lit(x, y + 1),
                        "{c:?} has an isolated ink bit at ({gx},{gy})"
                    );
                }
            }
        }
    }

    #[test]
    fn mask_round_trips_row_encoding() {
        let m = mask([0b10000, 0, 0, 0, 0, 0, 0b00001]);
        assert_eq!(m & 1, 1, "top-left is bit 0");
        assert_eq!(m >> 34 & 1, 1, "bottom-right is bit 34");
        assert_eq!(m.count_ones(), 2);
    }
}
