#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <unordered_map>

#include "lemmarec/dataprep.hpp"
#include "lemmarec/errors.hpp"
#include "lemmarec/rng.hpp"
#include "lemmarec/text.hpp"

namespace lemmarec::data {

namespace {

// 5x7 glyphs, one byte per row, bit 4 = leftmost column.
using Glyph = std::array<std::uint8_t, 7>;

const std::unordered_map<char, Glyph>& glyph_table() {
    static const std::unordered_map<char, Glyph> table = {
        {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}}, {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
        {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}}, {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
        {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}}, {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
        {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}}, {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
        {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}}, {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
        {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}}, {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
        {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}}, {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
        {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
        {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}}, {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
        {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}}, {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
        {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
        {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11}}, {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
        {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}}, {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
        {'a', {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F}}, {'b', {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x1E}},
        {'c', {0x00, 0x00, 0x0E, 0x11, 0x10, 0x11, 0x0E}}, {'d', {0x01, 0x01, 0x0F, 0x11, 0x11, 0x11, 0x0F}},
        {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}}, {'f', {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08}},
        {'g', {0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E}}, {'h', {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x11}},
        {'i', {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E}}, {'j', {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C}},
        {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}}, {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'m', {0x00, 0x00, 0x1A, 0x15, 0x15, 0x15, 0x15}}, {'n', {0x00, 0x00, 0x1E, 0x11, 0x11, 0x11, 0x11}},
        {'o', {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E}}, {'p', {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10}},
        {'q', {0x00, 0x00, 0x0F, 0x11, 0x0F, 0x01, 0x01}}, {'r', {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10}},
        {'s', {0x00, 0x00, 0x0F, 0x10, 0x0E, 0x01, 0x1E}}, {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
        {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D}}, {'v', {0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04}},
        {'w', {0x00, 0x00, 0x11, 0x15, 0x15, 0x15, 0x0A}}, {'x', {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
        {'y', {0x00, 0x00, 0x11, 0x11, 0x0F, 0x01, 0x0E}}, {'z', {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
        {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}}, {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}}, {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
        {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}}, {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
        {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}}, {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
        {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}}, {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
        {'-', {0x00, 0x00, 0x00, 0x0E, 0x00, 0x00, 0x00}}, {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
        {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}}, {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
        {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    };
    return table;
}

struct InkBounds {
    int min_x = 1 << 30;
    int min_y = 1 << 30;
    int max_x = -1;
    int max_y = -1;

    void cover(int x, int y) {
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
    }
    bool empty() const { return max_x < 0; }
    BBox box() const { return {min_x, min_y, max_x + 1, max_y + 1}; }
};

void put_ink(Image& img, int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b, InkBounds* bounds) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    std::uint8_t* px = img.at(x, y);
    px[0] = r;
    px[1] = g;
    px[2] = b;
    if (bounds) bounds->cover(x, y);
}

struct TextStyle {
    int scale = 3;
    double shear = 0.0;          // columns shift left as rows go down
    int baseline_jitter = 0;     // max per-character vertical offset
    std::uint8_t r = 30, g = 30, b = 80;
};

// Renders `s` with its top-left pen position at (x, y); returns tight ink bounds.
InkBounds draw_text(Image& img, const std::string& s, int x, int y, const TextStyle& style, Rng& rng) {
    const auto& table = glyph_table();
    InkBounds bounds;
    int pen_x = x;
    for (char c : s) {
        const auto it = table.find(c);
        if (it == table.end()) throw ValidationError(std::string("cannot render character '") + c + "'");
        const int jitter =
            style.baseline_jitter > 0 ? static_cast<int>(rng.uniform_int(-style.baseline_jitter, style.baseline_jitter))
                                      : 0;
        for (int row = 0; row < 7; ++row) {
            const std::uint8_t bits = it->second[static_cast<std::size_t>(row)];
            const int shear_px = static_cast<int>(std::lround((6 - row) * style.shear * style.scale));
            for (int col = 0; col < 5; ++col) {
                if (!(bits & (0x10 >> col))) continue;
                for (int dy = 0; dy < style.scale; ++dy) {
                    for (int dx = 0; dx < style.scale; ++dx) {
                        put_ink(img, pen_x + shear_px + col * style.scale + dx, y + jitter + row * style.scale + dy,
                                style.r, style.g, style.b, c == ' ' ? nullptr : &bounds);
                    }
                }
            }
        }
        pen_x += 6 * style.scale;  // 5 columns + 1 gap
    }
    return bounds;
}

int text_width(const std::string& s, int scale) {
    if (s.empty()) return 0;
    return static_cast<int>(s.size()) * 6 * scale - scale;
}

}  // namespace

SyntheticCard generate_card(const std::string& lemma, std::uint64_t style_seed, const SynthConfig& cfg) {
    const std::string norm = text::nfc_normalize(lemma);
    if (norm.empty()) throw ValidationError("cannot render an empty lemma");

    Rng rng(detail::mix64(style_seed ^ detail::fnv1a(norm)));
    const int W = cfg.card_width;
    const int H = cfg.card_height;

    // Paper-like background with mild per-pixel noise.
    Image img(W, H);
    const int base = static_cast<int>(rng.uniform_int(236, 250));
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double n = rng.normal() * cfg.noise_stddev;
            const auto v = static_cast<std::uint8_t>(std::clamp(base + static_cast<int>(std::lround(n)), 0, 255));
            std::uint8_t* px = img.at(x, y);
            px[0] = v;
            px[1] = v;
            px[2] = static_cast<std::uint8_t>(std::min(255, v + 2));
        }
    }

    if (cfg.ruled_lines) {
        const int lines = static_cast<int>(rng.uniform_int(2, 4));
        for (int i = 0; i < lines; ++i) {
            const int ly = static_cast<int>(rng.uniform_int(H * 55 / 100, H * 92 / 100));
            const auto shade = static_cast<std::uint8_t>(rng.uniform_int(150, 190));
            for (int x = W / 20; x < W - W / 20; ++x) put_ink(img, x, ly, shade, shade, shade, nullptr);
        }
    }

    // Lemma text, scaled down if needed so the whole box stays inside
    // [0, 0.46 W) x [0, 0.42 H) -- its center is then safely in the quarter.
    TextStyle style;
    style.scale = static_cast<int>(rng.uniform_int(3, 5));
    const int max_w = W * 46 / 100;
    while (style.scale > 2 && text_width(norm, style.scale) > max_w) --style.scale;
    if (text_width(norm, style.scale) > max_w) {
        throw ValidationError("lemma too long to render inside the upper-left quarter: " + norm);
    }
    style.shear = rng.uniform(0.0, 0.25);
    style.baseline_jitter = style.scale > 3 ? 1 : 0;
    style.r = static_cast<std::uint8_t>(rng.uniform_int(15, 60));
    style.g = static_cast<std::uint8_t>(rng.uniform_int(15, 60));
    style.b = static_cast<std::uint8_t>(rng.uniform_int(50, 110));

    const int tw = text_width(norm, style.scale);
    const int th = 7 * style.scale;
    const int lx = static_cast<int>(rng.uniform_int(6, std::max(7, max_w - tw)));
    const int ly = static_cast<int>(rng.uniform_int(6, std::max(7, H * 42 / 100 - th)));

    SyntheticCard card;
    card.lemma = norm;
    const InkBounds lemma_bounds = draw_text(img, norm, lx, ly, style, rng);
    if (lemma_bounds.empty()) throw ValidationError("lemma rendered no ink: " + norm);
    card.lemma_box = lemma_bounds.box();

    // Decoy text blocks: source indices and stray annotations. Their centers
    // must land outside the upper-left quarter.
    const int decoys = cfg.max_decoys > 0 ? static_cast<int>(rng.uniform_int(0, cfg.max_decoys)) : 0;
    static const char* kDecoyAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    for (int d = 0; d < decoys; ++d) {
        std::string decoy_text;
        const int len = static_cast<int>(rng.uniform_int(3, 9));
        for (int i = 0; i < len; ++i) decoy_text.push_back(kDecoyAlphabet[rng.uniform_int(0, 35)]);

        TextStyle decoy_style;
        decoy_style.scale = static_cast<int>(rng.uniform_int(2, 4));
        decoy_style.r = static_cast<std::uint8_t>(rng.uniform_int(30, 90));
        decoy_style.g = decoy_style.r;
        decoy_style.b = static_cast<std::uint8_t>(rng.uniform_int(40, 110));
        const int dw = text_width(decoy_text, decoy_style.scale);
        const int dh = 7 * decoy_style.scale;

        // quadrant 0 = upper-right, 1 = lower-left, 2 = lower-right
        const int quadrant = static_cast<int>(rng.uniform_int(0, 2));
        int dx_min, dx_max, dy_min, dy_max;
        if (quadrant == 0) {
            dx_min = W / 2 + 4;
            dx_max = W - dw - 4;
            dy_min = 4;
            dy_max = H / 2 - dh - 4;
        } else if (quadrant == 1) {
            dx_min = 4;
            dx_max = W / 2 - dw - 4;
            dy_min = H / 2 + 4;
            dy_max = H - dh - 4;
        } else {
            dx_min = W / 2 + 4;
            dx_max = W - dw - 4;
            dy_min = H / 2 + 4;
            dy_max = H - dh - 4;
        }
        if (dx_max < dx_min || dy_max < dy_min) continue;  // does not fit; skip this decoy
        const int dx = static_cast<int>(rng.uniform_int(dx_min, dx_max));
        const int dy = static_cast<int>(rng.uniform_int(dy_min, dy_max));
        const InkBounds b = draw_text(img, decoy_text, dx, dy, decoy_style, rng);
        if (!b.empty()) card.decoy_boxes.push_back(b.box());
    }

    if (cfg.max_speckles > 0) {
        const int speckles = static_cast<int>(rng.uniform_int(cfg.max_speckles / 2, cfg.max_speckles));
        for (int i = 0; i < speckles; ++i) {
            const int sx = static_cast<int>(rng.uniform_int(0, W - 1));
            const int sy = static_cast<int>(rng.uniform_int(0, H - 1));
            const int radius = static_cast<int>(rng.uniform_int(1, 2));
            const auto shade = static_cast<std::uint8_t>(rng.uniform_int(20, 120));
            for (int oy = -radius; oy <= radius; ++oy) {
                for (int ox = -radius; ox <= radius; ++ox) {
                    if (ox * ox + oy * oy <= radius * radius) put_ink(img, sx + ox, sy + oy, shade, shade, shade, nullptr);
                }
            }
        }
    }

    card.image = std::move(img);
    return card;
}

std::pair<Image, BBox> generate_synthetic_card(const std::string& lemma, std::uint64_t style_seed,
                                               const SynthConfig& cfg) {
    SyntheticCard card = generate_card(lemma, style_seed, cfg);
    return {std::move(card.image), card.lemma_box};
}

std::vector<std::string> sample_lemmas(int count, std::uint64_t seed) {
    static const char* kOnsets[] = {"s",  "st", "sc", "m",  "v",  "t",  "l",  "n",  "p",  "c",
                                    "pr", "tr", "gr", "fl", "qu", "b",  "d",  "f",  "g",  "r"};
    static const char* kVowels[] = {"a", "e", "i", "o", "u", "ae", "au"};
    static const char* kCodas[] = {"", "n", "r", "s", "l", "m", "ct", "x"};
    static const char* kEndings[] = {"us", "a", "um", "is", "or", "io", "tas", "men", "tio", "ens"};

    Rng rng(detail::mix64(seed ^ 0x1e77a5ULL));
    std::set<std::string> seen;
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(out.size()) < count) {
        std::string word;
        const int syllables = static_cast<int>(rng.uniform_int(1, 3));
        for (int i = 0; i < syllables; ++i) {
            word += kOnsets[rng.uniform_int(0, 19)];
            word += kVowels[rng.uniform_int(0, 6)];
            if (rng.uniform01() < 0.35) word += kCodas[rng.uniform_int(0, 7)];
        }
        word += kEndings[rng.uniform_int(0, 9)];
        if (word.size() > 19) continue;
        if (rng.uniform01() < 0.08) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        if (seen.insert(word).second) out.push_back(word);
    }
    return out;
}

}  // namespace lemmarec::data
