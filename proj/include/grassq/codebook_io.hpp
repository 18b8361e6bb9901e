// SPDX-License-Identifier: Apache-2.0
//
// Codebook files: a JSON document
//
//   {"format": "grassq-codebook", "version": 1,
//    "n": 4, "p": 1, "q": 1, "beta": 2, "K": 16,
//    "provenance": {"kind": "maxmin", "seed": 7, "trace": [...]},
//    "entries": [[re, im, re, im, ...], ...]}
//
// Each entry is its n x q basis in row-major order, every element written as
// a (real, imaginary) pair with 17 significant digits.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "grassq/quantization.hpp"

namespace grassq {

std::string serialize_codebook(const Codebook& C);

/// Parses and re-validates a codebook document. Malformed or truncated input
/// throws FormatError; a basis off orthonormality by more than kTolOrtho
/// throws OrthonormalityError; coincident entries throw DuplicateEntry.
/// `origin` becomes the Loaded provenance path.
Codebook parse_codebook(std::string_view text, const std::string& origin = "");

void save_codebook(const Codebook& C, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace grassq
