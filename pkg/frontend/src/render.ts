// HTML string rendering, kept DOM-free so it is testable in plain node.

import { FlagSpan, ReviewDetail, ReviewSummary } from './api.js';
import { Banner, ConsoleState } from './model.js';

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

/**
 * Highlight flagged spans inside the draft using the offsets verbatim.
 * Spans that do not slice the draft to their recorded text (a replaced
 * draft keeps the assessment of the original completion) are skipped
 * rather than guessed at.
 */
export function highlightDraft(draft: string, spans: FlagSpan[]): string {
  const usable = spans
    .filter((s) => draft.slice(s.start, s.end) === s.matched)
    .sort((a, b) => a.start - b.start);
  let cursor = 0;
  const pieces: string[] = [];
  for (const span of usable) {
    if (span.start < cursor) continue;
    pieces.push(escapeHtml(draft.slice(cursor, span.start)));
    pieces.push(
      `<mark class="risk ${span.category}" title="${span.category}">` +
        escapeHtml(draft.slice(span.start, span.end)) +
        '</mark>',
    );
    cursor = span.end;
  }
  pieces.push(escapeHtml(draft.slice(cursor)));
  return pieces.join('');
}

export function renderQueue(items: ReviewSummary[], selectedId: string | null): string {
  if (items.length === 0) {
    return '<p class="empty">No pending reviews. New drafts appear here automatically.</p>';
  }
  const rows = items
    .map((item) => {
      const classes = item.review_id === selectedId ? 'row selected' : 'row';
      return (
        `<li class="${classes}" data-review="${escapeHtml(item.review_id)}">` +
        `<span class="rid">${escapeHtml(item.review_id)}</span>` +
        `<span class="query">${escapeHtml(item.query_text)}</span>` +
        `<span class="session">${escapeHtml(item.session_id)}</span></li>`
      );
    })
    .join('');
  return `<ul class="queue">${rows}</ul>`;
}

export function renderBanner(banner: Banner): string {
  if (banner.kind === 'none') return '';
  return `<div class="banner ${banner.kind}">${escapeHtml(banner.message)}</div>`;
}

export function renderDetail(state: ConsoleState): string {
  const detail = state.detail;
  if (!detail) {
    return '<p class="empty">Select a pending item to review it.</p>';
  }
  return [
    `<h2>${escapeHtml(detail.review_id)} <span class="status">${detail.status}</span></h2>`,
    `<p class="meta">session ${escapeHtml(detail.session_id)} · domain ${escapeHtml(
      detail.domain_tag,
    )} · persona ${escapeHtml(detail.persona)}</p>`,
    `<h3>Query</h3><blockquote>${escapeHtml(detail.query_text)}</blockquote>`,
    `<h3>Draft</h3><div class="draft">${highlightDraft(detail.draft, detail.risk.spans)}</div>`,
    renderRisk(detail),
    renderDocuments(detail),
  ].join('\n');
}

function renderRisk(detail: ReviewDetail): string {
  const risk = detail.risk;
  const badge = risk.verdict === 'allow' ? 'ok' : 'blocked';
  return (
    `<h3>Risk</h3><p class="risk-line ${badge}">verdict ${risk.verdict} · score ${risk.score} · ` +
    `toxicity ${risk.toxicity_count} · pii ${risk.pii_count}</p>`
  );
}

function renderDocuments(detail: ReviewDetail): string {
  if (detail.documents.length === 0) {
    return '<h3>Retrieved documents</h3><p class="empty">none</p>';
  }
  const rows = detail.documents
    .map(
      ([domain, docId, score]) =>
        `<li><code>${escapeHtml(domain)}/${escapeHtml(docId)}</code> score ${score.toFixed(4)}</li>`,
    )
    .join('');
  return `<h3>Retrieved documents</h3><ol class="documents">${rows}</ol>`;
}
