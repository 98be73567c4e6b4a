#include "arw/stacks.hpp"

#include <cmath>
#include <stdexcept>

namespace arw {

std::string_view to_string(Instruction ins) {
  switch (ins) {
    case Instruction::Left:
      return "L";
    case Instruction::Right:
      return "R";
    case Instruction::Sleep:
      return "S";
  }
  return "?";
}

double sleep_probability(const Params& params) {
  if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda)) {
    throw std::invalid_argument("lambda must be a finite non-negative number");
  }
  return params.lambda / (1.0 + params.lambda);
}

InstructionSource::InstructionSource(std::variant<Random, Scripted> impl) : impl_(std::move(impl)) {
  if (const auto* r = std::get_if<Random>(&impl_)) {
    sleep_p_ = sleep_probability(r->params);
    jump_half_ = (1.0 - sleep_p_) / 2.0;
  }
}

InstructionSource InstructionSource::random(std::uint64_t master_seed, Params params) {
  return InstructionSource(Random{master_seed, params});
}

InstructionSource InstructionSource::scripted(
    std::map<std::pair<Site, std::uint64_t>, Instruction> table, Instruction fallback) {
  return InstructionSource(Scripted{std::move(table), fallback});
}

InstructionSource InstructionSource::scripted(const std::map<Site, std::vector<Instruction>>& stacks,
                                              Instruction fallback) {
  std::map<std::pair<Site, std::uint64_t>, Instruction> table;
  for (const auto& [site, stack] : stacks) {
    for (std::uint64_t i = 0; i < stack.size(); ++i) table[{site, i}] = stack[i];
  }
  return scripted(std::move(table), fallback);
}

Instruction InstructionSource::scripted_at(Site site, std::uint64_t index) const {
  const auto& s = std::get<Scripted>(impl_);
  const auto it = s.table.find({site, index});
  return it == s.table.end() ? s.fallback : it->second;
}

Instruction instruction_at(const InstructionSource& source, Site site, std::uint64_t index) {
  return source.at(site, index);
}

std::vector<Instruction> stack_prefix(const InstructionSource& source, Site site, std::size_t len) {
  std::vector<Instruction> out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i) out.push_back(source.at(site, i));
  return out;
}

}  // namespace arw
