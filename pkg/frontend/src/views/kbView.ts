/**
 * Knowledge-base browser: criteria grouped by quality category, plus the
 * full profile-by-criterion attribute table with intervals shown as ranges.
 */

import type { KnowledgeBaseJson } from "../types";
import { formatAttribute, kbGroups } from "../viewmodels";

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

export function renderKbView(container: HTMLElement, kb: KnowledgeBaseJson): void {
  container.replaceChildren();

  for (const group of kbGroups(kb)) {
    const section = el("div", "kb-group");
    section.appendChild(el("h3", "kb-category", group.category.replace(/-/g, " ")));

    const table = el("table", "kb-table");
    const head = el("tr");
    head.appendChild(el("th", undefined, "criterion"));
    head.appendChild(el("th", undefined, "direction"));
    for (const profile of kb.profiles) {
      head.appendChild(el("th", undefined, profile.name));
    }
    table.appendChild(head);

    for (const criterion of group.criteria) {
      const row = el("tr");
      const label = el("td", "kb-criterion");
      label.appendChild(el("div", undefined, criterion.name));
      const hint = criterion.unit
        ? `${criterion.id} (${criterion.unit})`
        : criterion.ordinal_levels
          ? `${criterion.id}: ${criterion.ordinal_levels.join(" < ")}`
          : criterion.id;
      label.appendChild(el("div", "kb-hint", hint));
      label.title = criterion.description ?? "";
      row.appendChild(label);
      row.appendChild(el("td", "kb-direction", criterion.direction));
      for (const profile of kb.profiles) {
        row.appendChild(el("td", undefined, formatAttribute(criterion, profile.attributes[criterion.id])));
      }
      table.appendChild(row);
    }

    const scroll = el("div", "table-scroll");
    scroll.appendChild(table);
    section.appendChild(scroll);
    container.appendChild(section);
  }
}
