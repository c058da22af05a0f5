use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HERALD: u8 = 0;
/// Port a: `ν_s` output of the demultiplexer, or one beamsplitter arm.
pub const PORT_A: u8 = 1;
/// Port b: `ν_i` output, or the other beamsplitter arm.
pub const PORT_B: u8 = 2;
pub const CHANNELS: [u8; 3] = [HERALD, PORT_A, PORT_B];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeTag {
    /// Picoseconds since the start of the run.
    pub time_ps: u64,
    pub channel: u8,
}

/// Time-ordered click records from a fixed set of channels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TimeTagStream {
    tags: Vec<TimeTag>,
}

impl TimeTagStream {
    pub fn new(tags: Vec<TimeTag>) -> Result<Self> {
        if let Some(t) = tags.iter().find(|t| !CHANNELS.contains(&t.channel)) {
            return Err(Error::UnknownChannel(t.channel));
        }
        if tags.windows(2).any(|w| w[1].time_ps < w[0].time_ps) {
            return Err(Error::invalid("tags", "times must be non-decreasing"));
        }
        Ok(Self { tags })
    }

    pub(crate) fn from_sorted(tags: Vec<TimeTag>) -> Self {
        debug_assert!(tags.windows(2).all(|w| w[1].time_ps >= w[0].time_ps));
        Self { tags }
    }

    pub fn tags(&self) -> &[TimeTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn count(&self, channel: u8) -> usize {
        self.tags.iter().filter(|t| t.channel == channel).count()
    }

    /// Click times on one channel, in order.
    pub fn times(&self, channel: u8) -> Result<Vec<u64>> {
        check_channel(channel)?;
        Ok(self
            .tags
            .iter()
            .filter(|t| t.channel == channel)
            .map(|t| t.time_ps)
            .collect())
    }

    /// `channel<TAB>time_ps` per line.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for t in &self.tags {
            writeln!(w, "{}\t{}", t.channel, t.time_ps)?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut tags = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::Parse {
                what: "time-tag stream",
                line: i + 1,
                reason: reason.to_string(),
            };
            let (ch, t) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected `channel<TAB>time_ps`"))?;
            tags.push(TimeTag {
                channel: ch.trim().parse().map_err(|_| bad("bad channel"))?,
                time_ps: t.trim().parse().map_err(|_| bad("bad time"))?,
            });
        }
        Self::new(tags)
    }

    /// CSV with header `channel,time_ps`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["channel", "time_ps"]).map_err(csv_err)?;
        for t in &self.tags {
            wr.serialize((t.channel, t.time_ps)).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut tags = Vec::new();
        for (i, rec) in rdr.deserialize::<(u8, u64)>().enumerate() {
            let (channel, time_ps) = rec.map_err(|e| Error::Parse {
                what: "time-tag CSV",
                line: i + 2,
                reason: e.to_string(),
            })?;
            tags.push(TimeTag { channel, time_ps });
        }
        Self::new(tags)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub(crate) fn check_channel(ch: u8) -> Result<()> {
    if CHANNELS.contains(&ch) {
        Ok(())
    } else {
        Err(Error::UnknownChannel(ch))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TimeTagStream {
        TimeTagStream::new(vec![
            TimeTag {
                time_ps: 2000,
                channel: 0,
            },
            TimeTag {
                time_ps: 2000,
                channel: 2,
            },
            TimeTag {
                time_ps: 1_002_000,
                channel: 0,
            },
            TimeTag {
                time_ps: 1_003_117,
                channel: 1,
            },
        ])
        .unwrap()
    }

    #[test]
    fn tsv_round_trip() {
        let mut buf = Vec::new();
        sample().write_tsv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "0\t2000\n2\t2000\n0\t1002000\n1\t1003117\n"
        );
        assert_eq!(TimeTagStream::read_tsv(buf.as_slice()).unwrap(), sample());
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone())
            .unwrap()
            .starts_with("channel,time_ps\n0,2000\n"));
        assert_eq!(TimeTagStream::read_csv(buf.as_slice()).unwrap(), sample());
    }

    #[test]
    fn rejects_bad_streams() {
        assert_eq!(
            TimeTagStream::new(vec![TimeTag { time_ps: 0, channel: 9 }]),
            Err(Error::UnknownChannel(9))
        );
        assert!(TimeTagStream::new(vec![
            TimeTag { time_ps: 5, channel: 0 },
            TimeTag { time_ps: 4, channel: 0 }
        ])
        .is_err());
        assert!(matches!(
            TimeTagStream::read_tsv("0\t1\n0 2\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
