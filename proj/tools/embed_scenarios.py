#!/usr/bin/env python3
"""Regenerates include/cptkin/cli/demos.hpp from scenarios/*.yaml."""
from pathlib import Path

ORDER = [
    "symmetric-exchange", "antisymmetric-stable", "antisymmetric-unstable",
    "matter-bose-einstein", "decohering-control", "laser", "antimatter-collapse",
    "antimatter-bose-einstein", "chain-symmetric", "typicality", "symmetry-ledger",
]

root = Path(__file__).resolve().parent.parent
lines = [
    "#pragma once", "",
    "// Built-in demo scenarios. Each mirrors scenarios/<name>.yaml; regenerate",
    "// with tools/embed_scenarios.py.", "",
    "#include <array>", "#include <string_view>", "",
    "namespace cptkin::cli {", "",
    "struct Demo {", "    std::string_view name;", "    std::string_view yaml;", "};", "",
    f"inline constexpr std::array<Demo, {len(ORDER)}> kDemos{{{{",
]
for name in ORDER:
    text = (root / "scenarios" / f"{name}.yaml").read_text()
    assert ')"' not in text
    lines.append(f'    {{"{name}", R"({text})"}},')
lines += [
    "}};", "",
    "inline const Demo* find_demo(std::string_view name) {",
    "    for (const auto& d : kDemos)", "        if (d.name == name) return &d;",
    "    return nullptr;", "}", "",
    "}  // namespace cptkin::cli", "",
]
(root / "include/cptkin/cli/demos.hpp").write_text("\n".join(lines))
