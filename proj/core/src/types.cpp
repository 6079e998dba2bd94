#include "mimosim/types.hpp"

#include <algorithm>
#include <cctype>

namespace mimosim {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string to_string(Topology t) { return t == Topology::CellFree ? "cf" : "mc"; }

std::string to_string(PrecoderKind k) {
  switch (k) {
    case PrecoderKind::MF: return "MF";
    case PrecoderKind::ZF: return "ZF";
    case PrecoderKind::MMSE: return "MMSE";
  }
  return "?";
}

std::string to_string(AllocatorKind k) {
  switch (k) {
    case AllocatorKind::UPA: return "UPA";
    case AllocatorKind::APA: return "APA";
    case AllocatorKind::RAPA: return "RAPA";
  }
  return "?";
}

Topology parse_topology(const std::string& s) {
  const auto v = lower(s);
  if (v == "cf" || v == "cell-free" || v == "cellfree") return Topology::CellFree;
  if (v == "mc" || v == "multi-cell" || v == "multicell") return Topology::MultiCell;
  throw std::invalid_argument("unknown topology '" + s + "' (expected cf or mc)");
}

PrecoderKind parse_precoder(const std::string& s) {
  const auto v = lower(s);
  if (v == "mf" || v == "cb") return PrecoderKind::MF;
  if (v == "zf") return PrecoderKind::ZF;
  if (v == "mmse") return PrecoderKind::MMSE;
  throw std::invalid_argument("unknown precoder '" + s + "' (expected MF, ZF or MMSE)");
}

AllocatorKind parse_allocator(const std::string& s) {
  const auto v = lower(s);
  if (v == "upa") return AllocatorKind::UPA;
  if (v == "apa") return AllocatorKind::APA;
  if (v == "rapa" || v == "r-apa") return AllocatorKind::RAPA;
  throw std::invalid_argument("unknown allocator '" + s + "' (expected UPA, APA or RAPA)");
}

}  // namespace mimosim
