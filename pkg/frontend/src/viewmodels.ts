/**
 * Pure data -> row transforms behind the four views.
 *
 * Ranking numbers pass through untouched: rows carry the exact score values
 * the service returned, and bar geometry is derived from them without
 * altering what is displayed.
 */

import type {
  AttributeJson,
  CriterionJson,
  EliminationJson,
  KnowledgeBaseJson,
  RankingJson,
  WhatIfJson,
} from "./types";

export const CATEGORY_ORDER = [
  "functional-suitability",
  "performance-efficiency",
  "compatibility",
  "usability",
  "reliability",
  "security",
  "maintainability",
  "portability",
];

export interface KbGroup {
  category: string;
  criteria: CriterionJson[];
}

/** Criteria grouped by quality category, in the standard category order. */
export function kbGroups(kb: KnowledgeBaseJson): KbGroup[] {
  const groups = new Map<string, CriterionJson[]>();
  for (const criterion of kb.criteria) {
    const bucket = groups.get(criterion.category) ?? [];
    bucket.push(criterion);
    groups.set(criterion.category, bucket);
  }
  const ordered = [
    ...CATEGORY_ORDER.filter((c) => groups.has(c)),
    ...[...groups.keys()].filter((c) => !CATEGORY_ORDER.includes(c)),
  ];
  return ordered.map((category) => ({ category, criteria: groups.get(category)! }));
}

function trimNumber(value: number): string {
  return String(Number(value.toPrecision(6)));
}

/** Human form of one profile attribute; intervals render as ranges. */
export function formatAttribute(
  criterion: CriterionJson,
  value: AttributeJson | undefined,
): string {
  if (value === undefined || value === null) return "n/a";
  if (typeof value === "boolean") return value ? "yes" : "no";
  if (typeof value === "string") return value;
  if (Array.isArray(value)) return value.join(", ");
  const unit = criterion.unit ? ` ${criterion.unit}` : "";
  if (value.lo === value.hi) return `${trimNumber(value.lo)}${unit}`;
  return `${trimNumber(value.lo)} to ${trimNumber(value.hi)}${unit}`;
}

export interface ResultRow {
  id: string;
  name: string;
  score: number;
  /** Bar length in percent; the label still shows the exact score. */
  barPercent: number;
  breakdown: { criterion: string; value: number }[];
}

export function resultRows(ranking: RankingJson, kb: KnowledgeBaseJson): ResultRow[] {
  return ranking.ranked.map((entry) => ({
    id: entry.id,
    name: kb.profiles.find((p) => p.id === entry.id)?.name ?? entry.id,
    score: entry.score,
    barPercent: Math.max(0, Math.min(100, entry.score * 100)),
    breakdown: Object.entries(entry.weighted_values).map(([criterion, value]) => ({
      criterion,
      value,
    })),
  }));
}

export interface EliminationRow {
  id: string;
  name: string;
  /** One line per violated constraint, exactly as the service worded it. */
  lines: string[];
}

export function eliminationRows(
  eliminations: EliminationJson[],
  kb: KnowledgeBaseJson,
): EliminationRow[] {
  return eliminations.map((elimination) => ({
    id: elimination.id,
    name: kb.profiles.find((p) => p.id === elimination.id)?.name ?? elimination.id,
    lines: elimination.violations.map((v) => v.explanation),
  }));
}

export interface WhatIfPointVm {
  weight: number;
  leader: string | null;
  scores: Record<string, number>;
}

export interface WhatIfSeries {
  /** Profiles that ever reach the top 3 across the sweep, first-seen order. */
  profiles: string[];
  points: WhatIfPointVm[];
}

export function whatifSeries(whatif: WhatIfJson): WhatIfSeries {
  const profiles: string[] = [];
  const points: WhatIfPointVm[] = [];
  for (const point of whatif.points) {
    const top = point.result.ranked.slice(0, 3);
    const scores: Record<string, number> = {};
    for (const entry of top) {
      scores[entry.id] = entry.score;
      if (!profiles.includes(entry.id)) profiles.push(entry.id);
    }
    points.push({
      weight: point.weight,
      leader: top.length > 0 ? top[0]!.id : null,
      scores,
    });
  }
  return { profiles, points };
}
