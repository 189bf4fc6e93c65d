// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bit-exact codecs between code rows and little-endian 16-bit word streams.
//
// Layout table (normative, container format v1). Within a word, bit 0 is
// least significant; a code is [s | exp | man] MSB first. The "high" segment
// of a weight holds its top bits, the "low" segment its low mantissa bits.
//
//   fp4-e2m1     block 16, 4 words: weight i in bits [4*(i%4),+4) of word i/4
//   fp5-e2m2     block 16, 5 words: top 4 bits as fp4 (words 0-3),
//                mantissa LSB of weight i in bit i of word 4
//   fp6-e2m3     block 16, 6 words: top 4 bits as fp4 (words 0-3), low 2 bits
//   fp6-e3m2     of weight i in bits [2*(i%8),+2) of word 4 + i/8
//   fp5.33-e2m3  block 3, 1 word: top 5 bits of weight j in bits [5j,5j+5),
//                shared LSB in bit 15
//   fp4.25-e2m2  block 64, 17 words: group g = weights 4g..4g+3; member j's
//                top 4 bits in bits [4j,+4) of word g; shared LSB of group g
//                in bit g of word 16
//   fp4.5-e2m2   block 32, 9 words: top 4 bits of weight i in words 0-7 as
//                fp4; shared LSB of group g (weights 2g,2g+1) in bit g of
//                word 8
//   fp4.33-e2m2  block 48, 13 words: top 4 bits of weight i in words 0-11 as
//                fp4; shared LSB of group g (weights 3g..3g+2) in bit g of
//                word 12

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "amsq/scheme.hpp"

namespace amsq {

/// One contiguous bit run of a code inside a packing block.
struct PackSegment {
  std::uint16_t word;
  std::uint8_t bit;
  std::uint8_t width;
  std::uint8_t code_shift;  // position of the segment's low bit in the code
};

struct SharedSlot {
  std::uint16_t word;
  std::uint8_t bit;
};

struct PackLayout {
  const QuantScheme* scheme;
  std::size_t block;           // weights per packing block
  std::size_t words_per_block;
  std::size_t segs_per_weight;
  std::vector<PackSegment> segments;  // block * segs_per_weight entries
  std::vector<SharedSlot> shared;     // one per group in a block, k > 1 only

  std::span<const PackSegment> segments_of(std::size_t weight) const {
    return std::span<const PackSegment>(segments)
        .subspan(weight * segs_per_weight, segs_per_weight);
  }
};

namespace detail {

inline PackLayout build_layout(const QuantScheme& s) {
  PackLayout L;
  L.scheme = &s;
  const auto u16 = [](std::size_t v) { return static_cast<std::uint16_t>(v); };
  const auto u8 = [](std::size_t v) { return static_cast<std::uint8_t>(v); };
  switch (s.id) {
    case SchemeId::fp4_e2m1:
      L.block = 16;
      L.words_per_block = 4;
      L.segs_per_weight = 1;
      for (std::size_t i = 0; i < 16; ++i) {
        L.segments.push_back({u16(i / 4), u8(4 * (i % 4)), 4, 0});
      }
      break;
    case SchemeId::fp5_e2m2:
      L.block = 16;
      L.words_per_block = 5;
      L.segs_per_weight = 2;
      for (std::size_t i = 0; i < 16; ++i) {
        L.segments.push_back({u16(i / 4), u8(4 * (i % 4)), 4, 1});
        L.segments.push_back({4, u8(i), 1, 0});
      }
      break;
    case SchemeId::fp6_e2m3:
    case SchemeId::fp6_e3m2:
      L.block = 16;
      L.words_per_block = 6;
      L.segs_per_weight = 2;
      for (std::size_t i = 0; i < 16; ++i) {
        L.segments.push_back({u16(i / 4), u8(4 * (i % 4)), 4, 2});
        L.segments.push_back({u16(4 + i / 8), u8(2 * (i % 8)), 2, 0});
      }
      break;
    case SchemeId::fp5_33_e2m3:
      L.block = 3;
      L.words_per_block = 1;
      L.segs_per_weight = 1;
      for (std::size_t j = 0; j < 3; ++j) {
        L.segments.push_back({0, u8(5 * j), 5, 1});
      }
      L.shared.push_back({0, 15});
      break;
    case SchemeId::fp4_25_e2m2:
      L.block = 64;
      L.words_per_block = 17;
      L.segs_per_weight = 1;
      for (std::size_t i = 0; i < 64; ++i) {
        L.segments.push_back({u16(i / 4), u8(4 * (i % 4)), 4, 1});
      }
      for (std::size_t g = 0; g < 16; ++g) L.shared.push_back({16, u8(g)});
      break;
    case SchemeId::fp4_5_e2m2:
      L.block = 32;
      L.words_per_block = 9;
      L.segs_per_weight = 1;
      for (std::size_t i = 0; i < 32; ++i) {
        L.segments.push_back({u16(i / 4), u8(4 * (i % 4)), 4, 1});
      }
      for (std::size_t g = 0; g < 16; ++g) L.shared.push_back({8, u8(g)});
      break;
    case SchemeId::fp4_33_e2m2:
      L.block = 48;
      L.words_per_block = 13;
      L.segs_per_weight = 1;
      for (std::size_t i = 0; i < 48; ++i) {
        L.segments.push_back({u16(i / 4), u8(4 * (i % 4)), 4, 1});
      }
      for (std::size_t g = 0; g < 16; ++g) L.shared.push_back({12, u8(g)});
      break;
  }
  return L;
}

}  // namespace detail

/// Fixed layout for a shipped scheme (see the table above).
inline const PackLayout& layout_of(const QuantScheme& scheme) {
  static const std::vector<PackLayout> layouts = [] {
    std::vector<PackLayout> v;
    for (const QuantScheme& s : all_schemes()) {
      v.push_back(detail::build_layout(s));
    }
    return v;
  }();
  return layouts[static_cast<std::size_t>(scheme.id)];
}

inline std::size_t packed_words_per_row(const PackLayout& layout,
                                        std::size_t padded_cols) {
  return padded_cols / layout.block * layout.words_per_block;
}

inline void pack_block(std::span<const std::uint8_t> codes,
                       const PackLayout& layout,
                       std::span<std::uint16_t> words) {
  for (std::size_t w = 0; w < layout.words_per_block; ++w) words[w] = 0;
  for (std::size_t i = 0; i < layout.block; ++i) {
    const unsigned code = codes[i];
    for (const PackSegment& seg : layout.segments_of(i)) {
      const unsigned bits = (code >> seg.code_shift) & ((1u << seg.width) - 1u);
      words[seg.word] = static_cast<std::uint16_t>(words[seg.word] |
                                                   (bits << seg.bit));
    }
  }
  if (!layout.shared.empty()) {
    const std::size_t k = static_cast<std::size_t>(layout.scheme->k);
    for (std::size_t g = 0; g < layout.shared.size(); ++g) {
      const unsigned bit = codes[g * k] & 1u;
      for (std::size_t j = 1; j < k; ++j) {
        if ((codes[g * k + j] & 1u) != bit) {
          throw std::runtime_error(
              "pack_row: shared mantissa bit mismatch within a group");
        }
      }
      if (bit) {
        const SharedSlot& slot = layout.shared[g];
        words[slot.word] =
            static_cast<std::uint16_t>(words[slot.word] | (1u << slot.bit));
      }
    }
  }
}

inline void unpack_block(std::span<const std::uint16_t> words,
                         const PackLayout& layout,
                         std::span<std::uint8_t> codes) {
  for (std::size_t i = 0; i < layout.block; ++i) {
    unsigned code = 0;
    for (const PackSegment& seg : layout.segments_of(i)) {
      const unsigned bits = (words[seg.word] >> seg.bit) &
                            ((1u << seg.width) - 1u);
      code |= bits << seg.code_shift;
    }
    codes[i] = static_cast<std::uint8_t>(code);
  }
  if (!layout.shared.empty()) {
    const std::size_t k = static_cast<std::size_t>(layout.scheme->k);
    for (std::size_t g = 0; g < layout.shared.size(); ++g) {
      const SharedSlot& slot = layout.shared[g];
      const unsigned bit = (words[slot.word] >> slot.bit) & 1u;
      for (std::size_t j = 0; j < k; ++j) {
        codes[g * k + j] = static_cast<std::uint8_t>(codes[g * k + j] | bit);
      }
    }
  }
}

/// Packs one row of codes (length a block multiple, shared LSBs consistent
/// within each group) into words. Bijective with unpack_row.
inline void pack_row(std::span<const std::uint8_t> codes,
                     const PackLayout& layout,
                     std::span<std::uint16_t> words) {
  if (codes.size() % layout.block != 0) {
    throw std::invalid_argument("pack_row: length is not a block multiple");
  }
  const std::size_t blocks = codes.size() / layout.block;
  if (words.size() != blocks * layout.words_per_block) {
    throw std::invalid_argument("pack_row: word buffer size mismatch");
  }
  for (std::size_t b = 0; b < blocks; ++b) {
    pack_block(codes.subspan(b * layout.block, layout.block), layout,
               words.subspan(b * layout.words_per_block,
                             layout.words_per_block));
  }
}

inline std::vector<std::uint16_t> pack_row(std::span<const std::uint8_t> codes,
                                           const PackLayout& layout) {
  std::vector<std::uint16_t> words(
      codes.size() / layout.block * layout.words_per_block);
  pack_row(codes, layout, words);
  return words;
}

/// Inverse of pack_row; reinserts each group's shared bit as the mantissa LSB
/// of all k members.
inline void unpack_row(std::span<const std::uint16_t> words,
                       const PackLayout& layout,
                       std::span<std::uint8_t> codes) {
  if (words.size() % layout.words_per_block != 0) {
    throw std::invalid_argument("unpack_row: length is not a block multiple");
  }
  const std::size_t blocks = words.size() / layout.words_per_block;
  if (codes.size() != blocks * layout.block) {
    throw std::invalid_argument("unpack_row: code buffer size mismatch");
  }
  for (std::size_t b = 0; b < blocks; ++b) {
    unpack_block(words.subspan(b * layout.words_per_block,
                               layout.words_per_block),
                 layout, codes.subspan(b * layout.block, layout.block));
  }
}

inline std::vector<std::uint8_t> unpack_row(
    std::span<const std::uint16_t> words, const PackLayout& layout) {
  std::vector<std::uint8_t> codes(words.size() / layout.words_per_block *
                                  layout.block);
  unpack_row(words, layout, codes);
  return codes;
}

}  // namespace amsq
