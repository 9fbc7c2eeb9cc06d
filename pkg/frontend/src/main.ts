/**
 * Boot: fetch the knowledge base, build the session, wire the four views.
 */

import { createApi } from "./api";
import { Session } from "./state";
import { renderEditorView } from "./views/editorView";
import { renderKbView } from "./views/kbView";
import { renderResultsView } from "./views/resultsView";
import { renderWhatIfView } from "./views/whatifView";
import "./styles.css";

function mustFind(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} in index.html`);
  return node;
}

async function boot(): Promise<void> {
  const api = createApi("");
  const versionBadge = mustFind("kb-version");
  const staleBanner = mustFind("stale-banner");
  const results = mustFind("results-view");
  const editor = mustFind("editor-view");
  const kbPane = mustFind("kb-view");
  const whatif = mustFind("whatif-view");

  let kb;
  try {
    kb = await api.kb();
  } catch (err) {
    results.textContent = `cannot reach the ranking service: ${String(err)}`;
    return;
  }
  const session = new Session(api, kb, 150);

  const renderAll = () => {
    versionBadge.textContent = `kb v${session.knowledgeBase().kb_version}`;
    renderKbView(kbPane, session.knowledgeBase());
    renderEditorView(editor, session.knowledgeBase(), session);
    renderResultsView(results, session);
    renderWhatIfView(whatif, session);
  };

  session.subscribe((event) => {
    if (event === "ranking" || event === "validation" || event === "error" || event === "busy") {
      renderResultsView(results, session);
    }
    if (event === "stale") {
      staleBanner.hidden = !session.snapshot().stale;
    }
  });

  const refreshBtn = mustFind("refresh-kb");
  refreshBtn.addEventListener("click", async () => {
    const fresh = await api.kb();
    await session.refreshKnowledgeBase(fresh);
    staleBanner.hidden = true;
    renderAll();
  });

  renderAll();
}

void boot();
