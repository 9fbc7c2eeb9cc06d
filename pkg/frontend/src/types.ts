/**
 * JSON shapes exchanged with the ranking service.
 *
 * These mirror the service's wire format exactly; nothing here is computed
 * client-side. Scores shown in the UI are the numbers from these payloads.
 */

export type Direction = "benefit" | "cost";
export type CriterionKind = "boolean" | "numeric-interval" | "ordinal" | "categorical";
export type OperatorId = "equals" | "at-least" | "at-most" | "includes-all";
export type Scalarization = "midpoint" | "pessimistic" | "optimistic";

export interface IntervalJson {
  lo: number;
  hi: number;
}

/** boolean | interval | ordinal level | label list, per the criterion kind. */
export type AttributeJson = boolean | IntervalJson | string | string[];

export interface CriterionJson {
  id: string;
  name: string;
  category: string;
  direction: Direction;
  kind: CriterionKind;
  unit?: string;
  ordinal_levels?: string[];
  description?: string;
}

export interface ProfileJson {
  id: string;
  name: string;
  attributes: Record<string, AttributeJson>;
  tech_tags: string[];
  sources: { ref: string; retrieved?: string | null }[];
}

export interface KnowledgeBaseJson {
  schema_version: number;
  kb_version: number;
  criteria: CriterionJson[];
  profiles: ProfileJson[];
}

/** The requirements document, as the service accepts it. */
export interface RequirementsJson {
  strict?: StrictJson[];
  preferences?: Record<string, number>;
  assets?: AssetsJson;
  options?: OptionsJson;
}

export interface StrictJson {
  criterion: string;
  operator: OperatorId;
  value: boolean | number | string | string[];
}

export interface AssetsJson {
  skills?: string[];
  infrastructure?: string[];
  affinity?: number;
}

export interface OptionsJson {
  scalarization?: Scalarization;
  "impute-missing-as-worst"?: boolean;
}

export interface RankedEntryJson {
  id: string;
  score: number;
  weighted_values: Record<string, number>;
}

export interface ViolationJson {
  requirement: StrictJson;
  observed: AttributeJson | null;
  explanation: string;
}

export interface EliminationJson {
  id: string;
  violations: ViolationJson[];
}

export interface RankingJson {
  ranked: RankedEntryJson[];
  eliminations: EliminationJson[];
  provenance: {
    kb_version: number;
    scalarization: Scalarization;
    weights: Record<string, number>;
  };
  warnings: string[];
}

export interface WhatIfPointJson {
  weight: number;
  result: RankingJson;
}

export interface WhatIfJson {
  points: WhatIfPointJson[];
}

export interface HealthJson {
  status: string;
  kb_version: number;
}

/** Error envelope every non-2xx response carries. */
export interface ApiErrorJson {
  status: number;
  code: string;
  message: string;
  findings: { severity: string; message: string; where?: string | null }[];
}
