/**
 * Export and import of the requirements file format.
 *
 * The editor's draft serializes to the same TOML the command-line tool
 * reads, covering exactly the constructs that format uses: [[strict]]
 * tables, the [preferences] / [assets] / [options] tables, and values that
 * are booleans, numbers, strings or string arrays. Exporting a draft and
 * importing the result yields an identical draft.
 */

import type { Draft, StrictDraft } from "./state";
import { emptyDraft } from "./state";
import type { OperatorId, Scalarization } from "./types";

const OPERATORS: OperatorId[] = ["equals", "at-least", "at-most", "includes-all"];
const STRATEGIES: Scalarization[] = ["midpoint", "pessimistic", "optimistic"];
const BARE_KEY = /^[A-Za-z0-9_-]+$/;

export class TomlError extends Error {}

// --- writing ---------------------------------------------------------------

function formatString(value: string): string {
  return `"${value.replace(/\\/g, "\\\\").replace(/"/g, '\\"')}"`;
}

function formatNumber(value: number): string {
  if (!Number.isFinite(value)) throw new TomlError(`cannot serialize ${value}`);
  return Number.isInteger(value) ? value.toFixed(1) : String(value);
}

function formatValue(value: boolean | number | string | string[]): string {
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") return formatNumber(value);
  if (typeof value === "string") return formatString(value);
  return `[${value.map(formatString).join(", ")}]`;
}

function formatKey(key: string): string {
  return BARE_KEY.test(key) ? key : formatString(key);
}

export function exportRequirements(draft: Draft): string {
  const blocks: string[] = [];
  for (const entry of draft.strict) {
    blocks.push(
      [
        "[[strict]]",
        `criterion = ${formatString(entry.criterion)}`,
        `operator = ${formatString(entry.operator)}`,
        `value = ${formatValue(entry.value)}`,
      ].join("\n"),
    );
  }
  const weights = Object.entries(draft.weights).filter(([, w]) => w > 0);
  if (weights.length > 0) {
    blocks.push(
      ["[preferences]", ...weights.map(([k, w]) => `${formatKey(k)} = ${formatNumber(w)}`)].join(
        "\n",
      ),
    );
  }
  if (draft.assets) {
    blocks.push(
      [
        "[assets]",
        `skills = ${formatValue(draft.assets.skills)}`,
        `infrastructure = ${formatValue(draft.assets.infrastructure)}`,
        `affinity = ${formatNumber(draft.assets.affinity)}`,
      ].join("\n"),
    );
  }
  const options: string[] = [];
  if (draft.scalarization !== "midpoint") {
    options.push(`scalarization = ${formatString(draft.scalarization)}`);
  }
  if (draft.imputeMissingAsWorst) {
    options.push("impute-missing-as-worst = true");
  }
  if (options.length > 0) {
    blocks.push(["[options]", ...options].join("\n"));
  }
  return blocks.join("\n\n") + (blocks.length > 0 ? "\n" : "");
}

// --- reading ---------------------------------------------------------------

type TomlValue = boolean | number | string | string[];

function parseScalar(raw: string, line: number): TomlValue {
  if (raw === "true") return true;
  if (raw === "false") return false;
  if (raw.startsWith('"')) return parseQuoted(raw, line);
  if (raw.startsWith("[")) return parseArray(raw, line);
  const asNumber = Number(raw);
  if (raw.length > 0 && Number.isFinite(asNumber)) return asNumber;
  throw new TomlError(`line ${line}: cannot parse value ${raw}`);
}

function parseQuoted(raw: string, line: number): string {
  if (raw.length < 2 || !raw.endsWith('"')) {
    throw new TomlError(`line ${line}: unterminated string ${raw}`);
  }
  const body = raw.slice(1, -1);
  let out = "";
  for (let i = 0; i < body.length; i++) {
    const ch = body[i];
    if (ch === "\\") {
      const next = body[++i];
      if (next === "\\") out += "\\";
      else if (next === '"') out += '"';
      else if (next === "n") out += "\n";
      else if (next === "t") out += "\t";
      else throw new TomlError(`line ${line}: unsupported escape \\${next ?? ""}`);
    } else if (ch === '"') {
      throw new TomlError(`line ${line}: stray quote in string`);
    } else {
      out += ch;
    }
  }
  return out;
}

function parseArray(raw: string, line: number): string[] {
  if (!raw.endsWith("]")) throw new TomlError(`line ${line}: unterminated array ${raw}`);
  const body = raw.slice(1, -1).trim();
  if (body === "") return [];
  const items: string[] = [];
  let i = 0;
  while (i < body.length) {
    if (body[i] !== '"') throw new TomlError(`line ${line}: arrays may hold only strings`);
    let j = i + 1;
    let value = "";
    while (j < body.length && body[j] !== '"') {
      if (body[j] === "\\") {
        const next = body[j + 1];
        if (next === "\\") value += "\\";
        else if (next === '"') value += '"';
        else throw new TomlError(`line ${line}: unsupported escape in array`);
        j += 2;
      } else {
        value += body[j];
        j += 1;
      }
    }
    if (j >= body.length) throw new TomlError(`line ${line}: unterminated string in array`);
    items.push(value);
    i = j + 1;
    while (i < body.length && (body[i] === " " || body[i] === "\t")) i++;
    if (i < body.length) {
      if (body[i] !== ",") throw new TomlError(`line ${line}: expected comma in array`);
      i++;
      while (i < body.length && (body[i] === " " || body[i] === "\t")) i++;
    }
  }
  return items;
}

function parseKey(raw: string, line: number): string {
  const trimmed = raw.trim();
  if (trimmed.startsWith('"')) return parseQuoted(trimmed, line);
  if (!BARE_KEY.test(trimmed)) throw new TomlError(`line ${line}: bad key ${raw}`);
  return trimmed;
}

/** Strip a trailing comment, respecting quotes. */
function stripComment(raw: string): string {
  let inString = false;
  for (let i = 0; i < raw.length; i++) {
    const ch = raw[i];
    if (ch === "\\" && inString) i++;
    else if (ch === '"') inString = !inString;
    else if (ch === "#" && !inString) return raw.slice(0, i);
  }
  return raw;
}

interface ParsedDoc {
  strict: Record<string, TomlValue>[];
  preferences: Record<string, TomlValue>;
  assets: Record<string, TomlValue> | null;
  options: Record<string, TomlValue>;
}

function parseDocument(text: string): ParsedDoc {
  const doc: ParsedDoc = { strict: [], preferences: {}, assets: null, options: {} };
  let current: Record<string, TomlValue> | null = null;
  let section = "";

  const lines = text.split(/\r?\n/);
  for (let n = 0; n < lines.length; n++) {
    const line = stripComment(lines[n] ?? "").trim();
    if (line === "") continue;
    const lineNo = n + 1;
    if (line === "[[strict]]") {
      current = {};
      doc.strict.push(current);
      section = "strict";
      continue;
    }
    if (line.startsWith("[[")) {
      throw new TomlError(`line ${lineNo}: unknown array section ${line}`);
    }
    if (line.startsWith("[")) {
      if (!line.endsWith("]")) throw new TomlError(`line ${lineNo}: bad section ${line}`);
      section = line.slice(1, -1).trim();
      if (section === "preferences") current = doc.preferences;
      else if (section === "assets") current = doc.assets = doc.assets ?? {};
      else if (section === "options") current = doc.options;
      else throw new TomlError(`line ${lineNo}: unknown section [${section}]`);
      continue;
    }
    const eq = line.indexOf("=");
    if (eq < 0) throw new TomlError(`line ${lineNo}: expected key = value`);
    if (current === null) throw new TomlError(`line ${lineNo}: key outside any section`);
    const key = parseKey(line.slice(0, eq), lineNo);
    const value = parseScalar(line.slice(eq + 1).trim(), lineNo);
    if (key in current) throw new TomlError(`line ${lineNo}: duplicate key ${key}`);
    current[key] = value;
  }
  return doc;
}

function asStringArray(value: TomlValue | undefined, what: string): string[] {
  if (value === undefined) return [];
  if (!Array.isArray(value)) throw new TomlError(`${what} must be an array of strings`);
  return value;
}

export function importRequirements(text: string): Draft {
  const doc = parseDocument(text);
  const draft = emptyDraft();

  draft.strict = doc.strict.map((entry, i): StrictDraft => {
    const { criterion, operator, value } = entry;
    if (typeof criterion !== "string" || typeof operator !== "string" || value === undefined) {
      throw new TomlError(`strict entry ${i} needs criterion, operator and value`);
    }
    const known = Object.keys(entry).filter((k) => !["criterion", "operator", "value"].includes(k));
    if (known.length > 0) throw new TomlError(`strict entry ${i}: unknown key ${known[0]}`);
    if (!OPERATORS.includes(operator as OperatorId)) {
      throw new TomlError(`strict entry ${i}: unknown operator ${operator}`);
    }
    return { criterion, operator: operator as OperatorId, value };
  });

  for (const [cid, weight] of Object.entries(doc.preferences)) {
    if (typeof weight !== "number" || !(weight >= 0 && weight <= 1)) {
      throw new TomlError(`preference ${cid}: weight must be a number in [0, 1]`);
    }
    if (weight > 0) draft.weights[cid] = weight;
  }

  if (doc.assets) {
    const affinity = doc.assets["affinity"] ?? 0;
    if (typeof affinity !== "number" || !(affinity >= 0 && affinity <= 1)) {
      throw new TomlError("assets affinity must be a number in [0, 1]");
    }
    for (const key of Object.keys(doc.assets)) {
      if (!["skills", "infrastructure", "affinity"].includes(key)) {
        throw new TomlError(`[assets]: unknown key ${key}`);
      }
    }
    draft.assets = {
      skills: asStringArray(doc.assets["skills"], "assets skills"),
      infrastructure: asStringArray(doc.assets["infrastructure"], "assets infrastructure"),
      affinity,
    };
  }

  for (const [key, value] of Object.entries(doc.options)) {
    if (key === "scalarization") {
      if (typeof value !== "string" || !STRATEGIES.includes(value as Scalarization)) {
        throw new TomlError(`unknown scalarization ${String(value)}`);
      }
      draft.scalarization = value as Scalarization;
    } else if (key === "impute-missing-as-worst") {
      if (typeof value !== "boolean") throw new TomlError("impute-missing-as-worst must be a boolean");
      draft.imputeMissingAsWorst = value;
    } else {
      throw new TomlError(`[options]: unknown key ${key}`);
    }
  }

  return draft;
}
