import { execFileSync } from 'child_process'
import { mkdtempSync, readFileSync, writeFileSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'
import { beforeAll, describe, expect, it } from 'vitest'
import { generateWeights } from '../src/backbone.js'
import { readF2be } from '../src/f2be.js'
import { extract, readManifest, writeFailuresReport } from '../src/extract.js'
import { writeTestPng } from './helpers.js'

let dir: string
let faceWeights: string
let objectWeights: string

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), 'extractor-'))
  faceWeights = join(dir, 'face.weights.json')
  objectWeights = join(dir, 'object.weights.json')
  generateWeights('face-descriptor', 7, faceWeights)
  generateWeights('generic-object', 7, objectWeights)
})

function makeManifest(rows: Array<[string, string]>, name = 'manifest.csv'): string {
  const path = join(dir, name)
  writeFileSync(path, 'record_id,image_path\n' + rows.map((r) => r.join(',')).join('\n') + '\n')
  return path
}

function defaultOptions(weights = faceWeights) {
  return {
    backbone: 'face-descriptor' as const,
    layer: 'fc6',
    weightsPath: weights,
    centerCrop: false,
  }
}

describe('extraction', () => {
  it('three valid images produce a dim-4096 F2BE accepted by the regression package', async () => {
    const images: Array<[string, string]> = []
    for (let i = 0; i < 3; i++) {
      const img = join(dir, `img${i}.png`)
      writeTestPng(img, 64, 64, 100 + i)
      images.push([`rec_${i}`, img])
    }
    const out = join(dir, 'three.f2be')
    const result = await extract(readManifest(makeManifest(images)), out, defaultOptions())
    expect(result.count).toBe(3)
    expect(result.dim).toBe(4096)
    expect(result.failures).toHaveLength(0)

    const { dim, vectors } = readF2be(out)
    expect(dim).toBe(4096)
    expect(vectors.size).toBe(3)
    for (const values of vectors.values()) {
      expect(values.every((v) => Number.isFinite(v))).toBe(true)
    }

    // cross-component: the Python package's reader must accept the file
    const report = execFileSync(
      'python3',
      [
        '-c',
        'import sys, json\n' +
          'from face2bmi.dataset import read_embeddings\n' +
          'vecs = read_embeddings(sys.argv[1])\n' +
          'dims = {len(v) for v in vecs.values()}\n' +
          'print(json.dumps({"count": len(vecs), "dims": sorted(dims)}))\n',
        out,
      ],
      { encoding: 'utf-8' },
    )
    expect(JSON.parse(report)).toEqual({ count: 3, dims: [4096] })
  }, 60_000)

  it('continues past undecodable images and reports them', async () => {
    const ok1 = join(dir, 'ok1.png')
    const ok2 = join(dir, 'ok2.png')
    const corrupt = join(dir, 'corrupt.png')
    writeTestPng(ok1, 48, 48, 1)
    writeTestPng(ok2, 48, 48, 2)
    writeFileSync(corrupt, Buffer.from('this is not a png'))
    const manifest = readManifest(
      makeManifest([['a', ok1], ['b', corrupt], ['c', ok2]], 'mixed.csv'),
    )
    const out = join(dir, 'mixed.f2be')
    const result = await extract(manifest, out, defaultOptions())
    expect(result.count).toBe(2)
    expect(result.failures).toHaveLength(1)
    expect(result.failures[0].recordId).toBe('b')
    const reportPath = join(dir, 'failures.csv')
    writeFailuresReport(reportPath, result.failures)
    const lines = readFileSync(reportPath, 'utf-8').trim().split('\n')
    expect(lines[0]).toBe('record_id,image_path,error')
    expect(lines).toHaveLength(2)
    expect(readF2be(out).vectors.size).toBe(2)
  }, 60_000)

  it('zero successes is an error', async () => {
    const corrupt = join(dir, 'junk.png')
    writeFileSync(corrupt, Buffer.from('junk'))
    const manifest = readManifest(makeManifest([['only', corrupt]], 'junk.csv'))
    await expect(extract(manifest, join(dir, 'none.f2be'), defaultOptions())).rejects.toThrow(
      /no images/,
    )
  }, 60_000)

  it('identical images under two ids yield bit-identical vectors', async () => {
    const img = join(dir, 'same.png')
    writeTestPng(img, 64, 64, 42)
    const manifest = readManifest(makeManifest([['first', img], ['second', img]], 'dup.csv'))
    const out = join(dir, 'dup.f2be')
    await extract(manifest, out, defaultOptions())
    const { vectors } = readF2be(out)
    const a = Buffer.from(vectors.get('first')!.buffer)
    const b = Buffer.from(vectors.get('second')!.buffer)
    expect(a.equals(b)).toBe(true)
  }, 60_000)

  it('rerunning the same extraction is byte-identical', async () => {
    const img = join(dir, 'stable.png')
    writeTestPng(img, 64, 64, 5)
    const manifest = readManifest(makeManifest([['r', img]], 'stable.csv'))
    const out1 = join(dir, 'stable1.f2be')
    const out2 = join(dir, 'stable2.f2be')
    await extract(manifest, out1, defaultOptions())
    await extract(manifest, out2, defaultOptions())
    expect(readFileSync(out1).equals(readFileSync(out2))).toBe(true)
  }, 60_000)

  it('backbone choice changes vectors but not structural validity', async () => {
    const img = join(dir, 'bb.png')
    writeTestPng(img, 64, 64, 9)
    const manifest = readManifest(makeManifest([['r', img]], 'bb.csv'))
    const outFace = join(dir, 'bb-face.f2be')
    const outObject = join(dir, 'bb-object.f2be')
    await extract(manifest, outFace, defaultOptions())
    await extract(manifest, outObject, {
      ...defaultOptions(objectWeights),
      backbone: 'generic-object',
    })
    const face = readF2be(outFace)
    const object = readF2be(outObject)
    expect(face.dim).toBe(4096)
    expect(object.dim).toBe(4096)
    const fa = Buffer.from(face.vectors.get('r')!.buffer)
    const ob = Buffer.from(object.vectors.get('r')!.buffer)
    expect(fa.equals(ob)).toBe(false)
  }, 60_000)

  it('layer tag selects a different descriptor width', async () => {
    const img = join(dir, 'layer.png')
    writeTestPng(img, 64, 64, 11)
    const manifest = readManifest(makeManifest([['r', img]], 'layer.csv'))
    const out = join(dir, 'fc7.f2be')
    const result = await extract(manifest, out, { ...defaultOptions(), layer: 'fc7' })
    expect(result.dim).toBe(512)
    await expect(
      extract(manifest, out, { ...defaultOptions(), layer: 'nope' }),
    ).rejects.toThrow(/unknown layer/)
  }, 60_000)

  it('rejects weights for the wrong backbone', async () => {
    const img = join(dir, 'wrong.png')
    writeTestPng(img, 64, 64, 12)
    const manifest = readManifest(makeManifest([['r', img]], 'wrong.csv'))
    await expect(
      extract(manifest, join(dir, 'w.f2be'), {
        ...defaultOptions(objectWeights),
        backbone: 'face-descriptor',
      }),
    ).rejects.toThrow(/backbone/)
  }, 60_000)

  it('manifest validation catches duplicates and bad headers', () => {
    expect(() =>
      readManifest(makeManifest([['x', 'a.png'], ['x', 'b.png']], 'dupid.csv')),
    ).toThrow(/duplicate/)
    const bad = join(dir, 'badheader.csv')
    writeFileSync(bad, 'id,path\nx,y\n')
    expect(() => readManifest(bad)).toThrow(/record_id,image_path/)
  })
})
