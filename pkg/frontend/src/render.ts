// DOM rendering. Pure function of the BoardView: wipe and rebuild the root
// on every change (the board is small). Bid controls exist in the DOM only
// while the service-reported phase is Voting; the results table only after
// settlement.

import { countdown, formatMs } from './countdown'
import type { BoardView } from './store'

export interface Handlers {
  onDeclare(credits: number): void
  onBid(courseId: string, amount: number): void
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text = '',
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag)
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value)
  if (text) node.textContent = text
  return node
}

export function render(root: HTMLElement, view: BoardView, handlers: Handlers, msSinceSync = 0): void {
  const doc = root.ownerDocument
  root.textContent = ''

  // status bar
  const status = el(doc, 'div', { class: 'status' })
  status.append(el(doc, 'span', { class: 'phase', 'data-phase': view.phase }, view.phase))
  const tick = countdown(view, msSinceSync)
  status.append(
    el(
      doc,
      'span',
      { class: 'countdown' },
      tick.msLeft === null ? tick.label : `${tick.label} ${formatMs(tick.msLeft)}`,
    ),
  )
  status.append(el(doc, 'span', { class: 'connection' }, view.connection))
  root.append(status)

  if (view.phase === 'Unopened') {
    root.append(el(doc, 'p', { class: 'empty' }, 'no active epoch'))
    return
  }

  // balance meter: minted / spent / remaining, all server-reported
  const meter = el(doc, 'div', { class: 'balance' })
  meter.append(el(doc, 'span', {}, `student ${view.studentId}`))
  meter.append(el(doc, 'span', { class: 'minted' }, `minted ${view.balance.minted}`))
  meter.append(el(doc, 'span', { class: 'spent' }, `spent ${view.balance.spent}`))
  meter.append(el(doc, 'span', { class: 'remaining' }, String(view.balance.remaining)))
  root.append(meter)

  // declaration form while the window can still be open
  if (view.phase === 'Preparation' && view.balance.minted === 0) {
    const form = el(doc, 'form', { class: 'declare' })
    const input = el(doc, 'input', { type: 'number', min: '1', name: 'credits', value: '4' })
    const button = el(doc, 'button', { type: 'submit' }, 'declare credits')
    form.append(input, button)
    form.addEventListener('submit', (event) => {
      event.preventDefault()
      handlers.onDeclare(Number((input as HTMLInputElement).value))
    })
    root.append(form)
  }

  // catalog with live totals; bid controls only during Voting
  const table = el(doc, 'table', { class: 'courses' })
  const head = el(doc, 'tr')
  for (const column of ['course', 'credits', 'capacity', 'slots', 'total tokens', 'my bid', '']) {
    head.append(el(doc, 'th', {}, column))
  }
  table.append(head)
  for (const course of view.courses) {
    const row = el(doc, 'tr', { 'data-course': course.course_id })
    row.append(el(doc, 'td', {}, `${course.course_id} ${course.title}`))
    row.append(el(doc, 'td', {}, String(course.credits)))
    row.append(el(doc, 'td', {}, String(course.capacity)))
    row.append(el(doc, 'td', {}, course.slots))
    row.append(el(doc, 'td', { class: 'total' }, String(course.total_tokens)))
    row.append(el(doc, 'td', { class: 'mine' }, String(view.myBids[course.course_id] ?? 0)))
    const cell = el(doc, 'td')
    if (view.bidsEnabled) {
      const amount = el(doc, 'input', {
        type: 'number',
        min: '1',
        max: String(view.balance.remaining),
        class: 'bid-amount',
      })
      const button = el(doc, 'button', { type: 'button', class: 'bid-button' }, 'bid')
      button.addEventListener('click', () => {
        handlers.onBid(course.course_id, Number((amount as HTMLInputElement).value))
      })
      cell.append(amount, button)
    }
    row.append(cell)
    table.append(row)
  }
  root.append(table)

  if (view.message) {
    root.append(el(doc, 'p', { class: 'message' }, view.message))
  }

  // results replace bid controls after settlement
  if (view.phase === 'Settled' && view.results) {
    const results = el(doc, 'div', { class: 'results' })
    results.append(el(doc, 'h2', {}, 'final schedule'))
    const table = el(doc, 'table', { class: 'awards' })
    const head = el(doc, 'tr')
    for (const column of ['student', 'course', 'round']) head.append(el(doc, 'th', {}, column))
    table.append(head)
    for (const award of view.results.awards) {
      const row = el(doc, 'tr', {
        class: award.student_id === view.studentId ? 'award mine' : 'award',
        'data-round': award.round,
      })
      row.append(el(doc, 'td', {}, award.student_id))
      row.append(el(doc, 'td', {}, award.course_id))
      row.append(el(doc, 'td', {}, award.round))
      table.append(row)
    }
    results.append(table)

    const earned = view.results.per_student_credits[view.studentId] ?? 0
    const declared = view.results.declared_credits[view.studentId] ?? 0
    results.append(
      el(doc, 'p', { class: 'credit-total' }, `your credits: ${earned}/${declared}`),
    )
    if (earned < declared) {
      results.append(
        el(doc, 'p', { class: 'shortfall' }, `short ${declared - earned} credit(s) this epoch`),
      )
    }
    root.append(results)
  }
}
