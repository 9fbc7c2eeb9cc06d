/**
 * Session state: the requirements draft being edited, the last ranking the
 * service returned, and a sensitivity cache.
 *
 * Two rules hold throughout. The draft is validated locally before any
 * request leaves the browser, and ranking results are only ever replaced by
 * the response to the newest edit (latest-wins), so a slow older response
 * can never overwrite a newer ranking.
 */

import type { Api } from "./api";
import { ApiError } from "./api";
import type {
  CriterionJson,
  KnowledgeBaseJson,
  OperatorId,
  RankingJson,
  RequirementsJson,
  Scalarization,
  StrictJson,
  WhatIfJson,
} from "./types";

export interface StrictDraft {
  criterion: string;
  operator: OperatorId;
  value: boolean | number | string | string[];
}

export interface AssetsDraft {
  skills: string[];
  infrastructure: string[];
  affinity: number;
}

/**
 * The editable requirements document. `weights` is sparse: a criterion the
 * user is indifferent about (slider at 0) has no entry at all, which is also
 * what makes export/import round-trips exact.
 */
export interface Draft {
  strict: StrictDraft[];
  weights: Record<string, number>;
  assets: AssetsDraft | null;
  scalarization: Scalarization;
  imputeMissingAsWorst: boolean;
}

export function emptyDraft(): Draft {
  return {
    strict: [],
    weights: {},
    assets: null,
    scalarization: "midpoint",
    imputeMissingAsWorst: false,
  };
}

export interface ValidationIssue {
  where: string;
  message: string;
}

const OPERATORS_BY_KIND: Record<string, OperatorId[]> = {
  boolean: ["equals"],
  "numeric-interval": ["at-least", "at-most"],
  ordinal: ["equals", "at-least", "at-most"],
  categorical: ["equals", "includes-all"],
};

function checkStrictValue(
  criterion: CriterionJson,
  entry: StrictDraft,
  where: string,
  issues: ValidationIssue[],
): void {
  const v = entry.value;
  switch (criterion.kind) {
    case "boolean":
      if (typeof v !== "boolean") {
        issues.push({ where, message: `${criterion.id} needs a true/false value` });
      }
      break;
    case "numeric-interval":
      if (typeof v !== "number" || !Number.isFinite(v)) {
        issues.push({ where, message: `${criterion.id} needs a finite number` });
      }
      break;
    case "ordinal": {
      const levels = criterion.ordinal_levels ?? [];
      if (typeof v !== "string" || !levels.includes(v)) {
        issues.push({
          where,
          message: `${criterion.id} needs one of: ${levels.join(", ")}`,
        });
      }
      break;
    }
    case "categorical":
      if (entry.operator === "equals") {
        if (typeof v !== "string" || v.length === 0) {
          issues.push({ where, message: `${criterion.id} equals needs a single label` });
        }
      } else if (!Array.isArray(v) || v.length === 0 || v.some((x) => typeof x !== "string")) {
        issues.push({ where, message: `${criterion.id} includes-all needs a label list` });
      }
      break;
  }
}

/** Local validation, mirroring what the service would reject with 422. */
export function validateDraft(draft: Draft, kb: KnowledgeBaseJson): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  const byId = new Map(kb.criteria.map((c) => [c.id, c]));

  draft.strict.forEach((entry, i) => {
    const where = `strict[${i}]`;
    const criterion = byId.get(entry.criterion);
    if (!criterion) {
      issues.push({ where, message: `unknown criterion '${entry.criterion}'` });
      return;
    }
    if (!(OPERATORS_BY_KIND[criterion.kind] ?? []).includes(entry.operator)) {
      issues.push({
        where,
        message: `${entry.operator} does not apply to a ${criterion.kind} criterion`,
      });
      return;
    }
    checkStrictValue(criterion, entry, where, issues);
  });

  let positive = 0;
  for (const [cid, weight] of Object.entries(draft.weights)) {
    if (!byId.has(cid)) {
      issues.push({ where: "preferences", message: `unknown criterion '${cid}'` });
    } else if (byId.get(cid)!.kind === "categorical") {
      issues.push({
        where: "preferences",
        message: `'${cid}' is categorical and cannot carry a weight`,
      });
    }
    if (typeof weight !== "number" || !(weight >= 0 && weight <= 1)) {
      issues.push({ where: "preferences", message: `weight for '${cid}' must be in [0, 1]` });
    } else if (weight > 0) {
      positive += 1;
    }
  }
  const affinity = draft.assets?.affinity ?? 0;
  if (draft.assets && !(affinity >= 0 && affinity <= 1)) {
    issues.push({ where: "assets", message: "affinity must be in [0, 1]" });
  }
  if (positive === 0 && !(draft.assets && affinity > 0)) {
    issues.push({
      where: "preferences",
      message: "set at least one preference above 0 to rank platforms",
    });
  }
  return issues;
}

/**
 * The request body for the current draft. Only positive weights travel:
 * a slider at 0 contributes nothing to the effective weights.
 */
export function draftToRequest(draft: Draft): RequirementsJson {
  const request: RequirementsJson = {};
  if (draft.strict.length > 0) {
    request.strict = draft.strict.map(
      (s): StrictJson => ({ criterion: s.criterion, operator: s.operator, value: s.value }),
    );
  }
  const preferences: Record<string, number> = {};
  for (const [cid, weight] of Object.entries(draft.weights)) {
    if (weight > 0) preferences[cid] = weight;
  }
  request.preferences = preferences;
  if (draft.assets) {
    request.assets = {
      skills: [...draft.assets.skills],
      infrastructure: [...draft.assets.infrastructure],
      affinity: draft.assets.affinity,
    };
  }
  const options: RequirementsJson["options"] = {};
  if (draft.scalarization !== "midpoint") options.scalarization = draft.scalarization;
  if (draft.imputeMissingAsWorst) options["impute-missing-as-worst"] = true;
  if (Object.keys(options).length > 0) request.options = options;
  return request;
}

export type SessionEvent =
  | "draft"
  | "validation"
  | "ranking"
  | "error"
  | "stale"
  | "busy";

export interface SessionSnapshot {
  draft: Draft;
  issues: ValidationIssue[];
  ranking: RankingJson | null;
  error: ApiError | Error | null;
  kbVersion: number;
  stale: boolean;
  busy: boolean;
}

/**
 * Drives the edit -> validate -> evaluate loop.
 *
 * Edits funnel through update(); each one re-validates, and valid drafts
 * schedule a debounced evaluate call. Responses are applied only when no
 * newer edit has been submitted since.
 */
export class Session {
  private draft: Draft = emptyDraft();
  private issues: ValidationIssue[] = [];
  private ranking: RankingJson | null = null;
  private error: ApiError | Error | null = null;
  private stale = false;
  private busy = false;

  private seq = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private controller: AbortController | null = null;
  private readonly sensitivity = new Map<string, WhatIfJson>();
  private readonly listeners = new Set<(event: SessionEvent) => void>();

  constructor(
    private readonly api: Api,
    private kb: KnowledgeBaseJson,
    private readonly debounceMs = 150,
  ) {}

  subscribe(listener: (event: SessionEvent) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(event: SessionEvent): void {
    for (const listener of this.listeners) listener(event);
  }

  snapshot(): SessionSnapshot {
    return {
      draft: this.draft,
      issues: this.issues,
      ranking: this.ranking,
      error: this.error,
      kbVersion: this.kb.kb_version,
      stale: this.stale,
      busy: this.busy,
    };
  }

  knowledgeBase(): KnowledgeBaseJson {
    return this.kb;
  }

  /** Swap in a freshly fetched KB after a stale flag. */
  refreshKnowledgeBase(kb: KnowledgeBaseJson): Promise<RankingJson | null> {
    this.kb = kb;
    this.stale = false;
    this.sensitivity.clear();
    this.emit("stale");
    return this.update((draft) => draft);
  }

  /**
   * Apply an edit and (when the result validates) schedule a re-rank.
   * Resolves with the ranking this edit produced, or null when the draft is
   * invalid or the edit was superseded by a newer one.
   */
  update(mutate: (draft: Draft) => Draft): Promise<RankingJson | null> {
    this.draft = mutate(this.draft);
    this.sensitivity.clear(); // sweeps were computed against the old draft
    this.emit("draft");
    this.issues = validateDraft(this.draft, this.kb);
    this.emit("validation");
    if (this.issues.length > 0) {
      // never submit an invalid draft
      this.cancelPending();
      return Promise.resolve(null);
    }
    return this.scheduleEvaluate();
  }

  setWeight(criterion: string, weight: number): Promise<RankingJson | null> {
    return this.update((draft) => {
      const weights = { ...draft.weights };
      if (weight <= 0) {
        delete weights[criterion];
      } else {
        weights[criterion] = weight;
      }
      return { ...draft, weights };
    });
  }

  replaceDraft(draft: Draft): Promise<RankingJson | null> {
    return this.update(() => draft);
  }

  private cancelPending(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.controller?.abort();
    this.controller = null;
    this.setBusy(false);
  }

  private setBusy(busy: boolean): void {
    if (this.busy !== busy) {
      this.busy = busy;
      this.emit("busy");
    }
  }

  private scheduleEvaluate(): Promise<RankingJson | null> {
    const id = ++this.seq;
    this.cancelPending();
    this.setBusy(true);
    return new Promise((resolve) => {
      const fire = async () => {
        this.timer = null;
        if (id !== this.seq) {
          resolve(null);
          return;
        }
        const controller = new AbortController();
        this.controller = controller;
        try {
          const ranking = await this.api.evaluate(
            draftToRequest(this.draft),
            controller.signal,
          );
          if (id !== this.seq) {
            resolve(null); // superseded while in flight
            return;
          }
          this.ranking = ranking;
          this.error = null;
          this.setBusy(false);
          if (ranking.provenance.kb_version !== this.kb.kb_version) {
            this.stale = true;
            this.emit("stale");
          }
          this.emit("ranking");
          resolve(ranking);
        } catch (err) {
          if (id !== this.seq || (err instanceof DOMException && err.name === "AbortError")) {
            resolve(null);
            return;
          }
          this.error = err instanceof Error ? err : new Error(String(err));
          this.setBusy(false);
          this.emit("error");
          resolve(null);
        }
      };
      if (this.debounceMs > 0) {
        this.timer = setTimeout(fire, this.debounceMs);
      } else {
        void fire();
      }
    });
  }

  /** What-if sweep, cached per (criterion, grid). */
  async whatIf(criterion: string, grid: number[]): Promise<WhatIfJson> {
    const key = `${criterion}|${grid.join(",")}`;
    const cached = this.sensitivity.get(key);
    if (cached) return cached;
    const result = await this.api.whatif(draftToRequest(this.draft), criterion, grid);
    this.sensitivity.set(key, result);
    return result;
  }

}
