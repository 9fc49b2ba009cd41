use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::schema::Dataset;
use super::DataError;

/// Uniform random partition without replacement: `n_train` rows go to the
/// first returned dataset, the rest to the second. Deterministic given the
/// seed; row order within each part follows the input order.
pub fn split_holdout(
    data: &Dataset,
    n_train: usize,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    let rows = data.n_rows();
    if n_train == 0 || n_train > rows {
        return Err(DataError::SplitOutOfRange { n_train, rows });
    }

    let mut indices: Vec<usize> = (0..rows).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let mut in_train = vec![false; rows];
    for &i in &indices[..n_train] {
        in_train[i] = true;
    }

    let mut train_rows = Vec::with_capacity(n_train);
    let mut holdout_rows = Vec::with_capacity(rows - n_train);
    for (i, row) in data.rows.iter().enumerate() {
        if in_train[i] {
            train_rows.push(row.clone());
        } else {
            holdout_rows.push(row.clone());
        }
    }

    let train = Dataset {
        names: data.names.clone(),
        kinds: data.kinds.clone(),
        rows: train_rows,
    };
    let holdout = Dataset {
        names: data.names.clone(),
        kinds: data.kinds.clone(),
        rows: holdout_rows,
    };
    Ok((train, holdout))
}
