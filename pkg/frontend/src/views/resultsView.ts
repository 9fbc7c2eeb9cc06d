/**
 * Results view: ranked bar list of fitting scores plus the eliminations
 * panel. Scores and violation wording come from the service verbatim.
 */

import type { Session } from "../state";
import { ApiError } from "../api";
import { eliminationRows, resultRows } from "../viewmodels";

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

export function renderResultsView(container: HTMLElement, session: Session): void {
  container.replaceChildren();
  const { ranking, issues, error, busy } = session.snapshot();
  const kb = session.knowledgeBase();

  if (issues.length > 0) {
    const box = el("div", "issue-box");
    box.appendChild(el("h3", undefined, "Fix before ranking"));
    for (const issue of issues) {
      box.appendChild(el("div", "issue-line", `${issue.where}: ${issue.message}`));
    }
    container.appendChild(box);
    return;
  }

  if (error) {
    const box = el("div", "error-box");
    const title = error instanceof ApiError ? `service error (${error.code})` : "request failed";
    box.appendChild(el("h3", undefined, title));
    box.appendChild(el("div", undefined, error.message));
    if (error instanceof ApiError) {
      for (const finding of error.findings) {
        box.appendChild(el("div", "issue-line", `${finding.severity}: ${finding.message}`));
      }
    }
    container.appendChild(box);
    return;
  }

  if (!ranking) {
    container.appendChild(
      el("div", "placeholder", busy ? "ranking..." : "adjust a slider to rank platforms"),
    );
    return;
  }

  const header = el("div", "results-header");
  header.appendChild(el("h3", undefined, "Ranking"));
  header.appendChild(
    el(
      "span",
      "kb-version-tag",
      `kb v${ranking.provenance.kb_version} / ${ranking.provenance.scalarization}${busy ? " / updating..." : ""}`,
    ),
  );
  container.appendChild(header);

  const rows = resultRows(ranking, kb);
  if (rows.length === 0) {
    container.appendChild(
      el("div", "placeholder", "no platform satisfies every strict requirement"),
    );
  }
  for (const [index, row] of rows.entries()) {
    const line = el("div", "result-row");
    line.appendChild(el("span", "result-rank", `${index + 1}.`));
    const bar = el("div", "result-bar");
    const fill = el("div", "result-fill");
    fill.style.width = `${row.barPercent}%`;
    bar.appendChild(fill);
    const label = el("span", "result-label", `${row.name} `);
    label.appendChild(el("span", "result-score", row.score.toFixed(4)));
    line.appendChild(bar);
    line.appendChild(label);
    line.title = row.breakdown
      .map((b) => `${b.criterion}: ${b.value.toFixed(4)}`)
      .join("\n");
    container.appendChild(line);
  }

  for (const warning of ranking.warnings) {
    container.appendChild(el("div", "warning-line", `warning: ${warning}`));
  }

  const eliminated = eliminationRows(ranking.eliminations, kb);
  if (eliminated.length > 0) {
    const panel = el("div", "eliminations");
    panel.appendChild(el("h3", undefined, "Eliminated"));
    for (const row of eliminated) {
      const item = el("div", "elimination-item");
      item.appendChild(el("div", "elimination-name", row.name));
      for (const line of row.lines) {
        item.appendChild(el("div", "elimination-line", line));
      }
      panel.appendChild(item);
    }
    container.appendChild(panel);
  }
}
