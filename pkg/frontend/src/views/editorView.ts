/**
 * Requirements editor: a preference slider per rankable criterion, strict
 * constraint rows with operator and threshold inputs, the asset inventory,
 * ranking options, and TOML export/import.
 */

import type { Session, StrictDraft } from "../state";
import type { CriterionJson, KnowledgeBaseJson, OperatorId, Scalarization } from "../types";
import { exportRequirements, importRequirements, TomlError } from "../toml";

const OPERATORS_BY_KIND: Record<string, OperatorId[]> = {
  boolean: ["equals"],
  "numeric-interval": ["at-least", "at-most"],
  ordinal: ["equals", "at-least", "at-most"],
  categorical: ["equals", "includes-all"],
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function sliderRow(criterion: CriterionJson, session: Session): HTMLElement {
  const row = el("div", "slider-row");
  const label = el("label", "slider-label", criterion.name);
  label.title = criterion.description ?? criterion.id;

  const input = el("input") as HTMLInputElement;
  input.type = "range";
  input.min = "0";
  input.max = "1";
  input.step = "0.01";
  input.setAttribute("list", "likert-ticks");
  input.value = String(session.snapshot().draft.weights[criterion.id] ?? 0);

  const value = el("span", "slider-value", input.value);
  input.addEventListener("input", () => {
    value.textContent = input.value;
    void session.setWeight(criterion.id, Number(input.value));
  });

  const anchors = el("div", "slider-anchors");
  anchors.appendChild(el("span", undefined, "Indifferent"));
  anchors.appendChild(el("span", undefined, "Extremely desirable"));

  const body = el("div", "slider-body");
  body.appendChild(input);
  body.appendChild(anchors);

  row.appendChild(label);
  row.appendChild(body);
  row.appendChild(value);
  row.dataset["criterion"] = criterion.id;
  return row;
}

function valueInput(
  criterion: CriterionJson,
  entry: StrictDraft,
  onChange: (value: StrictDraft["value"]) => void,
): HTMLElement {
  switch (criterion.kind) {
    case "boolean": {
      const select = el("select") as HTMLSelectElement;
      for (const option of ["true", "false"]) {
        select.appendChild(new Option(option, option));
      }
      select.value = entry.value === false ? "false" : "true";
      select.addEventListener("change", () => onChange(select.value === "true"));
      return select;
    }
    case "numeric-interval": {
      const input = el("input") as HTMLInputElement;
      input.type = "number";
      input.step = "any";
      input.value = typeof entry.value === "number" ? String(entry.value) : "";
      input.placeholder = criterion.unit ?? "";
      input.addEventListener("change", () => onChange(Number(input.value)));
      return input;
    }
    case "ordinal": {
      const select = el("select") as HTMLSelectElement;
      for (const level of criterion.ordinal_levels ?? []) {
        select.appendChild(new Option(level, level));
      }
      if (typeof entry.value === "string") select.value = entry.value;
      select.addEventListener("change", () => onChange(select.value));
      return select;
    }
    case "categorical": {
      const input = el("input") as HTMLInputElement;
      input.type = "text";
      input.placeholder = entry.operator === "equals" ? "label" : "label, label";
      input.value = Array.isArray(entry.value)
        ? entry.value.join(", ")
        : typeof entry.value === "string"
          ? entry.value
          : "";
      input.addEventListener("change", () => {
        const labels = input.value.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
        onChange(entry.operator === "equals" ? (labels[0] ?? "") : labels);
      });
      return input;
    }
  }
}

function defaultValueFor(criterion: CriterionJson, operator: OperatorId): StrictDraft["value"] {
  switch (criterion.kind) {
    case "boolean":
      return true;
    case "numeric-interval":
      return 0;
    case "ordinal":
      return criterion.ordinal_levels?.[0] ?? "";
    case "categorical":
      return operator === "equals" ? "" : [];
  }
}

function strictRow(
  kb: KnowledgeBaseJson,
  session: Session,
  index: number,
  entry: StrictDraft,
  rerender: () => void,
): HTMLElement {
  const row = el("div", "strict-row");
  const criterion = kb.criteria.find((c) => c.id === entry.criterion) ?? kb.criteria[0]!;

  const setEntry = (next: StrictDraft) => {
    void session.update((draft) => {
      const strict = draft.strict.slice();
      strict[index] = next;
      return { ...draft, strict };
    });
    rerender();
  };

  const criterionSelect = el("select") as HTMLSelectElement;
  for (const c of kb.criteria) {
    criterionSelect.appendChild(new Option(c.name, c.id));
  }
  criterionSelect.value = criterion.id;
  criterionSelect.addEventListener("change", () => {
    const next = kb.criteria.find((c) => c.id === criterionSelect.value)!;
    const operator = (OPERATORS_BY_KIND[next.kind] ?? ["equals"])[0]!;
    setEntry({ criterion: next.id, operator, value: defaultValueFor(next, operator) });
  });

  const operatorSelect = el("select") as HTMLSelectElement;
  for (const op of OPERATORS_BY_KIND[criterion.kind] ?? []) {
    operatorSelect.appendChild(new Option(op, op));
  }
  operatorSelect.value = entry.operator;
  operatorSelect.addEventListener("change", () => {
    const operator = operatorSelect.value as OperatorId;
    setEntry({ ...entry, operator, value: defaultValueFor(criterion, operator) });
  });

  const remove = el("button", "remove-btn", "remove");
  remove.addEventListener("click", () => {
    void session.update((draft) => ({
      ...draft,
      strict: draft.strict.filter((_, i) => i !== index),
    }));
    rerender();
  });

  row.appendChild(criterionSelect);
  row.appendChild(operatorSelect);
  row.appendChild(valueInput(criterion, entry, (value) => setEntry({ ...entry, value })));
  row.appendChild(remove);
  return row;
}

function parseTags(raw: string): string[] {
  return raw.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
}

export function renderEditorView(
  container: HTMLElement,
  kb: KnowledgeBaseJson,
  session: Session,
): void {
  container.replaceChildren();
  const draft = session.snapshot().draft;

  // preference sliders
  const sliders = el("div", "editor-block");
  sliders.appendChild(el("h3", undefined, "Preferences"));
  const ticks = el("datalist") as HTMLDataListElement;
  ticks.id = "likert-ticks";
  for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
    const option = document.createElement("option");
    option.value = String(tick);
    ticks.appendChild(option);
  }
  sliders.appendChild(ticks);
  for (const criterion of kb.criteria) {
    if (criterion.kind === "categorical") continue; // label sets have no order to weight
    sliders.appendChild(sliderRow(criterion, session));
  }

  // strict constraints
  const strictBlock = el("div", "editor-block");
  strictBlock.appendChild(el("h3", undefined, "Strict requirements"));
  const strictList = el("div", "strict-list");
  const renderStrict = () => {
    strictList.replaceChildren();
    session.snapshot().draft.strict.forEach((entry, index) => {
      strictList.appendChild(strictRow(kb, session, index, entry, renderStrict));
    });
  };
  renderStrict();
  const addStrict = el("button", undefined, "add constraint");
  addStrict.addEventListener("click", () => {
    const first = kb.criteria[0];
    if (!first) return;
    const operator = (OPERATORS_BY_KIND[first.kind] ?? ["equals"])[0]!;
    void session.update((d) => ({
      ...d,
      strict: [...d.strict, { criterion: first.id, operator, value: defaultValueFor(first, operator) }],
    }));
    renderStrict();
  });
  strictBlock.appendChild(strictList);
  strictBlock.appendChild(addStrict);

  // assets
  const assetsBlock = el("div", "editor-block");
  assetsBlock.appendChild(el("h3", undefined, "Existing assets"));
  const skills = el("input") as HTMLInputElement;
  skills.type = "text";
  skills.placeholder = "skills, comma separated";
  skills.value = draft.assets?.skills.join(", ") ?? "";
  const infrastructure = el("input") as HTMLInputElement;
  infrastructure.type = "text";
  infrastructure.placeholder = "infrastructure, comma separated";
  infrastructure.value = draft.assets?.infrastructure.join(", ") ?? "";
  const affinity = el("input") as HTMLInputElement;
  affinity.type = "range";
  affinity.min = "0";
  affinity.max = "1";
  affinity.step = "0.01";
  affinity.value = String(draft.assets?.affinity ?? 0);
  const affinityValue = el("span", "slider-value", affinity.value);
  const applyAssets = () => {
    const next = {
      skills: parseTags(skills.value),
      infrastructure: parseTags(infrastructure.value),
      affinity: Number(affinity.value),
    };
    const empty = next.skills.length === 0 && next.infrastructure.length === 0 && next.affinity === 0;
    void session.update((d) => ({ ...d, assets: empty ? null : next }));
  };
  skills.addEventListener("change", applyAssets);
  infrastructure.addEventListener("change", applyAssets);
  affinity.addEventListener("input", () => {
    affinityValue.textContent = affinity.value;
    applyAssets();
  });
  assetsBlock.appendChild(skills);
  assetsBlock.appendChild(infrastructure);
  const affinityRow = el("div", "slider-row");
  affinityRow.appendChild(el("label", "slider-label", "affinity weight"));
  affinityRow.appendChild(affinity);
  affinityRow.appendChild(affinityValue);
  assetsBlock.appendChild(affinityRow);

  // options
  const optionsBlock = el("div", "editor-block");
  optionsBlock.appendChild(el("h3", undefined, "Options"));
  const strategy = el("select") as HTMLSelectElement;
  for (const s of ["midpoint", "pessimistic", "optimistic"]) {
    strategy.appendChild(new Option(s, s));
  }
  strategy.value = draft.scalarization;
  strategy.addEventListener("change", () => {
    void session.update((d) => ({ ...d, scalarization: strategy.value as Scalarization }));
  });
  const impute = el("input") as HTMLInputElement;
  impute.type = "checkbox";
  impute.checked = draft.imputeMissingAsWorst;
  impute.addEventListener("change", () => {
    void session.update((d) => ({ ...d, imputeMissingAsWorst: impute.checked }));
  });
  const imputeLabel = el("label", "option-label");
  imputeLabel.appendChild(impute);
  imputeLabel.appendChild(document.createTextNode(" treat missing attributes as worst observed"));
  optionsBlock.appendChild(strategy);
  optionsBlock.appendChild(imputeLabel);

  // export / import
  const fileBlock = el("div", "editor-block");
  fileBlock.appendChild(el("h3", undefined, "Requirements file"));
  const exportBtn = el("button", undefined, "export TOML");
  const importBtn = el("button", undefined, "import TOML");
  const fileMessage = el("div", "file-message");
  const textArea = el("textarea") as HTMLTextAreaElement;
  textArea.rows = 10;
  textArea.placeholder = "exported requirements appear here; paste a file and import";
  exportBtn.addEventListener("click", () => {
    textArea.value = exportRequirements(session.snapshot().draft);
    fileMessage.textContent = "exported current draft";
  });
  importBtn.addEventListener("click", () => {
    try {
      const imported = importRequirements(textArea.value);
      void session.replaceDraft(imported);
      fileMessage.textContent = "imported; editor reloaded";
      renderEditorView(container, kb, session);
    } catch (err) {
      fileMessage.textContent = err instanceof TomlError ? err.message : String(err);
    }
  });
  fileBlock.appendChild(exportBtn);
  fileBlock.appendChild(importBtn);
  fileBlock.appendChild(textArea);
  fileBlock.appendChild(fileMessage);

  container.appendChild(sliders);
  container.appendChild(strictBlock);
  container.appendChild(assetsBlock);
  container.appendChild(optionsBlock);
  container.appendChild(fileBlock);
}
