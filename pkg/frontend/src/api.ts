/**
 * Typed client for the ranking service.
 *
 * Every method resolves with the parsed JSON body or rejects with ApiError
 * carrying the service's error envelope, so callers can show the service's
 * own message verbatim.
 */

import type {
  ApiErrorJson,
  HealthJson,
  KnowledgeBaseJson,
  RankingJson,
  RequirementsJson,
  WhatIfJson,
} from "./types";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly findings: ApiErrorJson["findings"];

  constructor(envelope: ApiErrorJson) {
    super(envelope.message);
    this.name = "ApiError";
    this.status = envelope.status;
    this.code = envelope.code;
    this.findings = envelope.findings ?? [];
  }
}

export interface Api {
  health(): Promise<HealthJson>;
  kb(): Promise<KnowledgeBaseJson>;
  evaluate(requirements: RequirementsJson, signal?: AbortSignal): Promise<RankingJson>;
  whatif(
    requirements: RequirementsJson,
    criterion: string,
    grid: number[],
    signal?: AbortSignal,
  ): Promise<WhatIfJson>;
}

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let envelope: ApiErrorJson;
  try {
    envelope = (await response.json()) as ApiErrorJson;
  } catch {
    envelope = {
      status: response.status,
      code: "unreadable-error",
      message: `service returned HTTP ${response.status}`,
      findings: [],
    };
  }
  throw new ApiError(envelope);
}

/**
 * Build a client. `base` is empty in the browser (same origin as the
 * service that mounts the UI) and an absolute origin in tests.
 */
export function createApi(base = "", fetchImpl: typeof fetch = fetch): Api {
  const post = (path: string, body: unknown, signal?: AbortSignal) =>
    fetchImpl(base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal: signal ?? null,
    });

  return {
    health: () => fetchImpl(base + "/health").then((r) => unwrap<HealthJson>(r)),
    kb: () => fetchImpl(base + "/kb").then((r) => unwrap<KnowledgeBaseJson>(r)),
    evaluate: (requirements, signal) =>
      post("/evaluate", requirements, signal).then((r) => unwrap<RankingJson>(r)),
    whatif: (requirements, criterion, grid, signal) =>
      post("/whatif", { requirements, criterion, grid }, signal).then((r) =>
        unwrap<WhatIfJson>(r),
      ),
  };
}
