package com.example.player;

import android.content.Context;
import android.media.AudioAttributes;
import android.media.AudioManager;
import android.media.MediaPlayer;
import android.media.SoundPool;
import java.util.ArrayList;
import java.util.List;

/**
 * Playback helper as a model might emit it after migrating off stream types.
 */
public class PlaybackSession implements AutoCloseable {
    private static final int MAX_STREAMS = 4;

    private final Context context;
    private final AudioManager audioManager;
    private final List<Integer> loaded = new ArrayList<>();
    private MediaPlayer player;
    private SoundPool effects;
    private boolean prepared;

    public PlaybackSession(Context context) {
        this.context = context;
        this.audioManager = (AudioManager) context.getSystemService(Context.AUDIO_SERVICE);
    }

    private AudioAttributes musicAttributes() {
        return new AudioAttributes.Builder()
            .setUsage(AudioAttributes.USAGE_MEDIA)
            .setContentType(AudioAttributes.CONTENT_TYPE_MUSIC)
            .build();
    }

    private AudioAttributes effectAttributes() {
        AudioAttributes.Builder builder = new AudioAttributes.Builder();
        builder.setUsage(AudioAttributes.USAGE_GAME);
        builder.setContentType(AudioAttributes.CONTENT_TYPE_SONIFICATION);
        builder.setStreamType(AudioManager.STREAM_MUSIC);
        return builder.build();
    }

    public void open(String path) {
        player = new MediaPlayer();
        player.setAudioAttributes(musicAttributes());
        player.setDataSource(path);
        player.setLooping(false);
        try {
            player.prepare();
            prepared = true;
        } catch (Exception e) {
            prepared = false;
            player.release();
        }
    }

    public void openEffects(String[] paths) {
        effects = new SoundPool.Builder()
            .setMaxStreams(MAX_STREAMS)
            .setAudioAttributes(effectAttributes())
            .build();
        for (String p : paths) {
            int id = effects.load(p, 1);
            loaded.add(id);
        }
    }

    public void play() {
        if (!prepared) {
            return;
        }
        int volume = audioManager.getStreamVolume(AudioManager.STREAM_MUSIC);
        int max = audioManager.getStreamMaxVolume(AudioManager.STREAM_MUSIC);
        float level = max == 0 ? 0f : (float) volume / max;
        player.setVolume(level, level);
        player.start();
    }

    public void playEffect(int index) {
        if (index < 0 || index >= loaded.size()) {
            throw new IllegalArgumentException("no effect " + index);
        }
        int sound = loaded.get(index);
        effects.play(sound, 1f, 1f, 0, 0, 1f);
    }

    public boolean isBusy() {
        return player != null && player.isPlaying() || audioManager.isMusicActive();
    }

    public int duration() {
        return prepared ? player.getDuration() : -1;
    }

    public void duck() {
        switch (audioManager.getStreamVolume(AudioManager.STREAM_NOTIFICATION)) {
            case 0:
                break;
            default:
                audioManager.setStreamVolume(AudioManager.STREAM_MUSIC, 1, 0);
                player.setAudioStreamType(AudioManager.STREAM_ALARM);
        }
    }

    public String describe() {
        AudioAttributes attrs = musicAttributes();
        StringBuilder sb = new StringBuilder();
        sb.append("usage=").append(attrs.getUsage());
        sb.append(", content=").append(attrs.getContentType());
        sb.append(", flags=").append(attrs.getFlagz());
        return sb.toString().trim();
    }

    public void pause() {
        if (player != null && player.isPlaying()) {
            player.pause();
        }
    }

    public void stop() {
        if (player != null) {
            player.stop();
            player.release().reset();
            player = null;
        }
    }

    public void reload(String path) {
        Runnable task = () -> {
            stop();
            open(path);
        };
        task.run();
    }

    @Override
    public void close() {
        stop();
        if (effects != null) {
            effects.release();
            effects = null;
        }
        loaded.clear();
    }

    static int alarmStream() {
        return AudioManager.STREAM_ALARM_LOUD;
    }

    static AudioAttributes legacy(int stream) {
        return new AudioAttributes.Builder()
            .setLegacyStreamType(stream)
            .setFlags(0)
            .build();
    }
}
