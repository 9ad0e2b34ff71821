#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvesec/errors.hpp"
#include "curvesec/piecewise.hpp"
#include "curvesec/section.hpp"

namespace curvesec {

namespace detail {

inline double number_or_ratio(const nlohmann::json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    const double den = j[1].get<double>();
    if (den == 0.0) throw parse_error(std::string(what) + ": zero denominator");
    return j[0].get<double>() / den;
  }
  throw parse_error(std::string(what) + ": expected a number or a [num,den] pair");
}

inline PiecewiseFunction function_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_object() || !j.contains("pieces") || !j["pieces"].is_array()) {
    throw parse_error(std::string(what) + ": expected an object with a \"pieces\" array");
  }
  std::vector<Piece> pieces;
  for (const auto& pj : j["pieces"]) {
    Piece p;
    const std::string kind = pj.value("kind", "power-sum");
    if (kind == "power-sum") {
      if (!pj.contains("domain") || !pj["domain"].is_array() || pj["domain"].size() != 2) {
        throw parse_error(std::string(what) + ": power-sum piece needs \"domain\":[a,b]");
      }
      p.lo = number_or_ratio(pj["domain"][0], what);
      p.hi = number_or_ratio(pj["domain"][1], what);
      if (!pj.contains("terms") || !pj["terms"].is_array()) {
        throw parse_error(std::string(what) + ": power-sum piece needs \"terms\"");
      }
      for (const auto& tj : pj["terms"]) {
        if (!tj.is_array() || tj.size() != 2) {
          throw parse_error(std::string(what) + ": term must be [coef, exponent]");
        }
        p.terms.push_back({number_or_ratio(tj[0], what), number_or_ratio(tj[1], what)});
      }
    } else if (kind == "table") {
      if (!pj.contains("knots") || !pj["knots"].is_array() || pj["knots"].size() < 2) {
        throw parse_error(std::string(what) + ": table piece needs >= 2 \"knots\"");
      }
      for (const auto& kj : pj["knots"]) {
        if (!kj.is_array() || kj.size() != 2) {
          throw parse_error(std::string(what) + ": knot must be [t, value]");
        }
        p.knots.push_back({number_or_ratio(kj[0], what), number_or_ratio(kj[1], what)});
      }
      if (pj.contains("domain")) {
        p.lo = number_or_ratio(pj["domain"][0], what);
        p.hi = number_or_ratio(pj["domain"][1], what);
      } else {
        p.lo = p.knots.front()[0];
        p.hi = p.knots.back()[0];
      }
    } else {
      throw parse_error(std::string(what) + ": unknown piece kind \"" + kind + "\"");
    }
    pieces.push_back(std::move(p));
  }
  try {
    return PiecewiseFunction::from_pieces(std::move(pieces));
  } catch (const validation_error& e) {
    throw parse_error(std::string(what) + ": " + e.what());
  }
}

}  // namespace detail

/// Parses a section config document:
///   {"name": str,
///    "phi":   {"pieces":[{"domain":[a,b],"kind":"power-sum","terms":[[c,e],...]}
///              | {"kind":"table","knots":[[t,v],...]}]},
///    "gamma": { ...same layout... }}
/// Exponents and any other number may be written as a [num,den] rational pair.
/// Structural problems throw parse_error; admissibility problems throw
/// validation_error.
inline SectionPair section_from_json(const nlohmann::json& doc, int samples = 1024) {
  if (!doc.is_object() || !doc.contains("phi") || !doc.contains("gamma")) {
    throw parse_error("section config: expected {\"name\",\"phi\",\"gamma\"}");
  }
  PiecewiseFunction phi_fn = detail::function_from_json(doc["phi"], "phi");
  PiecewiseFunction gamma = detail::function_from_json(doc["gamma"], "gamma");
  CurveMap phi = CurveMap::validate(std::move(phi_fn));
  return validate_section(std::move(phi), std::move(gamma), samples,
                          doc.value("name", std::string{}));
}

inline SectionPair load_section_file(const std::string& path, int samples = 1024) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error("malformed JSON in " + path + ": " + e.what());
  }
  return section_from_json(doc, samples);
}

}  // namespace curvesec
