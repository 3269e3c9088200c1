/**
 * F2BE binary embedding container (little-endian):
 *
 *   magic  4 bytes  "F2BE"
 *   u16    version  1
 *   u32    dim
 *   u64    count
 *   per record: u16 id byte-length, UTF-8 id, dim float32 values
 *
 * Records are written sorted by record id so output is byte-stable
 * regardless of processing order.
 */

import { readFileSync, writeFileSync } from 'fs'

export const F2BE_MAGIC = 'F2BE'
export const F2BE_VERSION = 1

export function writeF2be(path: string, vectors: Map<string, Float32Array>): void {
  if (vectors.size === 0) {
    throw new Error('cannot write an empty embedding map (dim undefined)')
  }
  let dim = -1
  for (const [id, values] of vectors) {
    if (dim === -1) dim = values.length
    else if (values.length !== dim) {
      throw new Error(`mixed embedding dims: ${id} has ${values.length}, expected ${dim}`)
    }
    for (const v of values) {
      if (!Number.isFinite(v)) throw new Error(`embedding ${id} has non-finite values`)
    }
  }
  const ids = [...vectors.keys()].sort()
  const chunks: Buffer[] = []
  const header = Buffer.alloc(4 + 2 + 4 + 8)
  header.write(F2BE_MAGIC, 0, 'ascii')
  header.writeUInt16LE(F2BE_VERSION, 4)
  header.writeUInt32LE(dim, 6)
  header.writeBigUInt64LE(BigInt(ids.length), 10)
  chunks.push(header)
  for (const id of ids) {
    const idBytes = Buffer.from(id, 'utf-8')
    if (idBytes.length > 0xffff) throw new Error(`record id too long: ${id.slice(0, 32)}...`)
    const lenBuf = Buffer.alloc(2)
    lenBuf.writeUInt16LE(idBytes.length, 0)
    chunks.push(lenBuf, idBytes)
    const values = vectors.get(id)!
    const valueBuf = Buffer.alloc(4 * dim)
    for (let i = 0; i < dim; i++) valueBuf.writeFloatLE(values[i], 4 * i)
    chunks.push(valueBuf)
  }
  writeFileSync(path, Buffer.concat(chunks))
}

export function readF2be(path: string): { dim: number; vectors: Map<string, Float32Array> } {
  const data = readFileSync(path)
  if (data.length < 18) throw new Error(`${path}: too short to hold an F2BE header`)
  if (data.toString('ascii', 0, 4) !== F2BE_MAGIC) {
    throw new Error(`${path}: bad magic`)
  }
  const version = data.readUInt16LE(4)
  if (version !== F2BE_VERSION) throw new Error(`${path}: unsupported version ${version}`)
  const dim = data.readUInt32LE(6)
  if (dim === 0) throw new Error(`${path}: embedding dim must be positive`)
  const count = Number(data.readBigUInt64LE(10))
  let offset = 18
  const vectors = new Map<string, Float32Array>()
  for (let r = 0; r < count; r++) {
    if (offset + 2 > data.length) throw new Error(`${path}: truncated at record ${r}`)
    const idLen = data.readUInt16LE(offset)
    offset += 2
    if (offset + idLen + 4 * dim > data.length) {
      throw new Error(`${path}: truncated at record ${r}`)
    }
    const id = data.toString('utf-8', offset, offset + idLen)
    offset += idLen
    const values = new Float32Array(dim)
    for (let i = 0; i < dim; i++) values[i] = data.readFloatLE(offset + 4 * i)
    offset += 4 * dim
    if (vectors.has(id)) throw new Error(`${path}: duplicate record id ${id}`)
    vectors.set(id, values)
  }
  if (offset !== data.length) throw new Error(`${path}: trailing bytes after payload`)
  return { dim, vectors }
}
