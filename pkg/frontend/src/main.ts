// Bootstrap: one store, one render loop, one event subscription.

import { ApiClient } from './api'
import { render } from './render'
import { BoardStore } from './store'

const SYNC_INTERVAL_MS = 10_000

function start(studentId: string): void {
  const api = new ApiClient('')
  const store = new BoardStore(api, studentId)
  const root = document.getElementById('board')!
  let syncedAt = performance.now()

  const draw = () => {
    render(root, store.view(), {
      onDeclare: (credits) => void store.submitDeclaration(credits),
      onBid: (courseId, amount) => void store.submitBid(courseId, amount),
    }, performance.now() - syncedAt)
  }

  store.onChange(() => {
    syncedAt = performance.now()
    draw()
  })
  void store.load()

  // countdown repaint + periodic phase re-sync to bound clock drift
  setInterval(draw, 1000)
  setInterval(() => {
    syncedAt = performance.now()
    void store.refreshPhase()
  }, SYNC_INTERVAL_MS)
}

const form = document.getElementById('login') as HTMLFormElement
form.addEventListener('submit', (event) => {
  event.preventDefault()
  const input = document.getElementById('student-id') as HTMLInputElement
  const studentId = input.value.trim()
  if (!studentId) return
  form.remove()
  start(studentId)
})
